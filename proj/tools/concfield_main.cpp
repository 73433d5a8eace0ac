#include "concfield/cli.hpp"

int main(int argc, char** argv) { return concfield::run_cli(argc, argv); }
