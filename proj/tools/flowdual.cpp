#include "flowdual/cli.hpp"

int main(int argc, char** argv) { return flowdual::run_command(argc, argv); }
