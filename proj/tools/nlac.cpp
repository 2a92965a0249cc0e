#include "nlac/cli.hpp"

int main(int argc, char** argv) { return nlac::cli_main(argc, argv); }
