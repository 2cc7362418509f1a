#include "wsckit/cli.h"

int main(int argc, char** argv) { return wsckit::run(argc, argv); }
