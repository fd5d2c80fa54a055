#include "silt/cli_runner.hpp"

int main(int argc, char** argv) { return silt::cli::main(argc, argv); }
