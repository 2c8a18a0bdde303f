#include "mlpsel/cli.hpp"

int main(int argc, char** argv) { return mlpsel::run_cli(argc, argv); }
