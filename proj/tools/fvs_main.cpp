#include "fvs/cli.hpp"

int main(int argc, char** argv) { return fvs::run_cli(argc, argv); }
