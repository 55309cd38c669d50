#include "stclean/cli.h"

int main(int argc, char** argv) {
  return stclean::cli::run(argc, argv);
}
