"""Profile a synthetic dataset with the CLI and validate the report against the schema."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main():
    apax, schema_path = sys.argv[1], Path(sys.argv[2])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cases = [
            ("f32", {"kind": "BandlimitedNoise", "dtype": "f32", "oversampling_ratio": 4, "snr_db": 70, "length": 65536}, 0),
            ("i32", {"kind": "SinePlusNoise", "dtype": "i32", "amplitude": 1e7, "snr_db": 50, "length": 32768}, 0),
            # an all-zero input has no defined correlation at any target
            ("i16", {"kind": "Constant", "dtype": "i16", "amplitude": 0, "length": 4096}, 2),
        ]
        for dtype, spec, expected in cases:
            (tmp / "spec.json").write_text(json.dumps(spec))
            subprocess.run([apax, "synth", tmp / "spec.json", tmp / "x.raw"], check=True, capture_output=True)
            proc = subprocess.run([apax, "profile", "--dtype", dtype, tmp / "x.raw", "--json", tmp / "r.json"],
                                  capture_output=True, text=True)
            assert proc.returncode == expected, proc.stderr
            if expected:
                continue
            report = json.loads((tmp / "r.json").read_text())
            jsonschema.validate(report, schema)
            assert report["recommended"]["r"] >= 0.99999
            print(f"{dtype}: report valid")


if __name__ == "__main__":
    main()
