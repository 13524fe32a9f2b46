#include "lucie/cli.hpp"

int main(int argc, char** argv) { return lucie::run_cli(argc, argv); }
