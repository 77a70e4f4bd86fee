#include "common.hpp"

namespace loglab::runner {

const std::vector<Experiment>& experiments() {
    static const std::vector<Experiment> all = [] {
        using namespace detail;
        std::vector<Experiment> v;
        v.push_back(brw_good_paths());
        v.push_back(brw_moments());
        v.push_back(fractal_crossing());
        v.push_back(fractal_pc());
        v.push_back(wn_covariance());
        v.push_back(wn_good_conditions());
        v.push_back(g2i_audit());
        v.push_back(lfpp_exponent());
        v.push_back(corridor_bound());
        v.push_back(geometry_checks());
        v.push_back(gaussian_checks());
        v.push_back(path_stats());
        return v;
    }();
    return all;
}

const Experiment* find_experiment(std::string_view name) {
    for (const auto& e : experiments())
        if (e.name == name) return &e;
    return nullptr;
}

}  // namespace loglab::runner
