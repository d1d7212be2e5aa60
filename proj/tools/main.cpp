#include "uneval/cli.hpp"

int main(int argc, char** argv) { return uneval::run_cli(argc, argv); }
