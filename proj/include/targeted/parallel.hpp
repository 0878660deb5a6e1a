#pragma once

namespace targeted {

/// Worker threads used inside the library; 0 restores the runtime default.
void set_thread_count(int threads);
int thread_count();

}  // namespace targeted
