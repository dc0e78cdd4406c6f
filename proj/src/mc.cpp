#include "jumpcalc/mc.hpp"

#include <thread>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace jumpcalc::mc {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
#endif
}

void parallel_paths(std::uint64_t n, int threads, const std::function<void(std::uint64_t)>& body) {
  threads = resolve_threads(threads);
#if defined(_OPENMP)
  if (threads > 1) {
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        body(static_cast<std::uint64_t>(i));
      } catch (...) {
#pragma omp critical
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
  }
#endif
  serial_paths(n, body);
}

nlohmann::ordered_json to_json(const McReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["n_paths"] = r.n_paths;
  j["seed"] = r.seed;
  j["estimate"] = r.estimate;
  j["se"] = r.se;
  j["target"] = r.target;
  j["tol_se"] = r.tol_se;
  j["pass"] = r.pass;
  if (!r.details.empty()) j["details"] = r.details;
  return j;
}

}  // namespace jumpcalc::mc
