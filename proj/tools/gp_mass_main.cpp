#include "gpmass/cli.hpp"

int main(int argc, char** argv) { return gpmass::cli_main(argc, argv); }
