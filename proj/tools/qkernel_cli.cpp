#include "qkernel/cli.hpp"

int main(int argc, char** argv) { return qk::cli_dispatch(argc, argv); }
