#include "persum/cli/commands.hpp"

int main(int argc, char** argv) { return persum::cli::main(argc, argv); }
