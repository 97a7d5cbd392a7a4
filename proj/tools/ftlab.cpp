#include "ftlab/cli.hpp"

int main(int argc, char** argv) { return ftlab::run_cli(argc, argv); }
