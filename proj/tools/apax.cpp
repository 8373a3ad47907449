#include "apax/cli.hpp"

int main(int argc, char** argv) { return apax::cli::run(argc, argv); }
