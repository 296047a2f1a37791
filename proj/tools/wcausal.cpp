#include "wcausal/commands.hpp"

int main(int argc, char** argv) { return wcausal::run_cli(argc, argv); }
