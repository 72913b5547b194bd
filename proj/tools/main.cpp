#include "hycharge/cli.hpp"

int main(int argc, char** argv) { return hycharge::run_cli(argc, argv); }
