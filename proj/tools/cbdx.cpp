#include "cbdx/cli.hpp"

int main(int argc, char** argv) { return cbdx::run_cli(argc, argv); }
