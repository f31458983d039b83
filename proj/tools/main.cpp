#include "ea/commands.hpp"

int main(int argc, char** argv) { return ea::run_cli(argc, argv); }
