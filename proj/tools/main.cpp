#include "qnet/cli.hpp"

int main(int argc, char** argv) { return qnet::cli::cli_main(argc, argv); }
