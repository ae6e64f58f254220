#include "zflow/cli.hpp"

int main(int argc, char** argv) { return zflow::run_cli(argc, argv); }
