// Execution-mode switch for the data-parallel kernels.  Every kernel that
// accepts Exec has a serial reference path and an OpenMP path that must agree
// bit for bit; tests compare the two directly.
#pragma once

namespace badflow {

enum class Exec { Serial, Parallel };

int worker_count(Exec mode);

}  // namespace badflow
