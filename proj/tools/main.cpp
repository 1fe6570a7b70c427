#include "collapsim/cli.hpp"

int main(int argc, char** argv) { return collapsim::cli::run_cli(argc, argv); }
