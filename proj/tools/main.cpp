#include "tailmoments/cli.hpp"

int main(int argc, char** argv) { return tailmoments::run_cli(argc, argv); }
