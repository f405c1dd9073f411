#include "udrive/cli/cli.hpp"

int main(int argc, char** argv) { return udrive::cli::main(argc, argv); }
