#include "scopf/cli.hpp"

int main(int argc, char** argv) { return scopf::run_cli(argc, argv); }
