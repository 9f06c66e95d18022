#include "nck/cli.hpp"

int main(int argc, char** argv) { return nck::cli_main(argc, argv); }
