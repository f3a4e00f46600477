#include "qab_cli.hpp"

int main(int argc, char** argv) { return qab::cli::cli_dispatch(argc, argv); }
