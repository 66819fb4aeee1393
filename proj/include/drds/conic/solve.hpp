#pragma once

// Public solve entry point. Backends are registered by name in a process-wide
// table; "ipm" (the built-in interior-point method) is always present and is
// the default when SolveSettings::backend is empty.

#include <drds/conic/detail/ipm.hpp>
#include <drds/conic/problem.hpp>

#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace drds::conic {

using BackendFn = std::function<Solution(const ConicProblem&, const SolveSettings&)>;

inline std::map<std::string, BackendFn>& backend_registry() {
  static std::map<std::string, BackendFn> reg = {
      {"ipm", [](const ConicProblem& p, const SolveSettings& st) {
         detail::IpmSolver solver;
         return solver.run(p, st);
       }}};
  return reg;
}

inline void register_backend(const std::string& name, BackendFn fn) {
  backend_registry()[name] = std::move(fn);
}

inline Solution solve(const ConicProblem& prob, const SolveSettings& settings = {}) {
  const std::string name = settings.backend.empty() ? "ipm" : settings.backend;
  auto& reg = backend_registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw std::invalid_argument("unknown solver backend: " + name);
  return it->second(prob, settings);
}

}  // namespace drds::conic
