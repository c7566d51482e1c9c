#ifndef ROTOPEND_RUN_HPP
#define ROTOPEND_RUN_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace rotopend {

inline constexpr const char* kVersion = "rotopend 0.1.0";

// Declarative description of one lab run. Field relevance depends on the
// experiment; validate() enforces the schema.
struct RunConfig {
    std::string experiment;  // sample-noise | simulate | melnikov-scan | rice |
                             // splitting | diffusion | report
    std::string model_id = "default";
    std::string kernel_id = "pexp";
    double kernel_a = 2.0;

    std::uint64_t seed = 42;
    double dt = 0.01;
    std::size_t n = 65536;       // sample-noise node count
    double t_start = 0.0;        // sample-noise grid origin

    double I = 0.5, phi = 0.15, tau = 0.0;
    double p = 0.0, q = 0.0;     // simulate initial pendulum state
    double t0 = 0.0, t1 = 10.0;  // simulate window
    double h = 1e-3;
    bool variational = false;

    double T = 50.0;             // scan / rice window length
    double S = 40.0;             // melnikov truncation
    double v = 0.0;              // rice level / diffusion level
    bool v_auto = true;          // diffusion: v = 0.5 * scanned max
    int n_paths = 400;
    std::string which = "P";     // melnikov-scan kind

    std::vector<double> eps_list{1e-2, 3e-3, 1e-3, 3e-4};
    double eps = 1e-3;

    bool strict = false;
    std::string out_dir;         // default runs/<experiment>-seed<seed>
    std::string report_dir;      // report experiment input

    void validate() const;
    std::string to_json_string() const;
    static RunConfig from_json_file(const std::string& filename);
};

// Executes the named experiment, writing a manifest before computing and the
// result artifacts after. Returns 0 on success, 2 on a tolerance breach in
// strict mode (operational errors surface as exceptions).
int run(const RunConfig& config);

// Aggregates manifests/summaries under `dir` into dir/report.json.
// Returns the path of the written report.
std::string build_report(const std::string& dir);

}  // namespace rotopend

#endif
