#pragma once

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "loglab/paths.hpp"
#include "loglab/runner/parallel.hpp"
#include "loglab/runner/runner.hpp"

namespace loglab::runner::detail {

inline bool enabled(const Json& params, std::string_view section) {
    for (const auto& s : params.at("sections"))
        if (s.get<std::string>() == section) return true;
    return false;
}

template <class T>
std::vector<T> list(const Json& j) {
    return j.get<std::vector<T>>();
}

inline paths::RefinementOptions refinement(const Json& p) {
    paths::RefinementOptions options;
    options.tube_paths = p.at("tube_paths").get<int>();
    options.branching = p.at("branching").get<int>();
    return options;
}

#if defined(__GNUC__)
__attribute__((format(printf, 1, 2)))
#endif
inline std::string strf(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

Experiment geometry_checks();
Experiment gaussian_checks();
Experiment path_stats();
Experiment brw_moments();
Experiment brw_good_paths();
Experiment fractal_crossing();
Experiment fractal_pc();
Experiment wn_covariance();
Experiment wn_good_conditions();
Experiment g2i_audit();
Experiment lfpp_exponent();
Experiment corridor_bound();

}  // namespace loglab::runner::detail
