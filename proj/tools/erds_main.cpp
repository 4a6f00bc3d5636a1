#include "erds/app.hpp"

int main(int argc, char** argv) { return erds::run_command(argc, argv); }
