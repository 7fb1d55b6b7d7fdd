#include "synthqa/cli.hpp"

int main(int argc, char** argv) { return synthqa::run_cli(argc, argv); }
