#include "gdae/cli.hpp"

int main(int argc, char** argv) { return gdae::cli::cli_main(argc, argv); }
