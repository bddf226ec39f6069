#pragma once

#include <string>
#include <vector>

#include "mivs/config.hpp"
#include "mivs/dataset.hpp"
#include "mivs/nn.hpp"
#include "mivs/validation.hpp"

namespace mivs::cmd {

/// Shared argument plumbing: optional config file plus ordered
/// "section.key=value" overrides (command-line flags compile down to these).
struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;

    RunConfig resolve() const;
};

struct GenArgs : CommonArgs {
    std::string out; ///< path prefix; writes <out>.train.ds/.test.ds/.csv/.log/.config
};

struct TrainArgs : CommonArgs {
    std::vector<std::string> data;  ///< one or more .train.ds files (pooled when several)
    std::vector<double> i_nom_ka;   ///< per-source normalization; missing entries use config
    std::string out;                ///< checkpoint path; curve CSV lands at <out>.curve.csv
    bool grid_search = false;
    std::string gs_hidden = "8,16";
    std::string gs_dense1 = "0";
    std::string gs_lr = "0.001,0.003";
};

struct EvalArgs : CommonArgs {
    std::string model;
    std::string data;
    std::string sidecar;     ///< optional scenario CSV; default: <data with .csv suffix>
    std::string out_prefix;  ///< writes <prefix>.metrics.csv (+ .noisy.metrics.csv)
};

struct AttackArgs : CommonArgs {
    std::string model;    ///< optional; enables the validation verdict
    std::string out_csv;  ///< attacked stream CSV (default attack_<kind>_<strategy>.csv)
};

struct BenchArgs : CommonArgs {
    std::string model;
    std::string out_csv; ///< default <model>.bench.csv
};

struct ModelInfoArgs {
    std::string model;
};

int cmd_gen(const GenArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_attack(const AttackArgs& args);
int cmd_bench(const BenchArgs& args);
int cmd_model_info(const ModelInfoArgs& args);

// Shared assembly helpers, exposed for tests and the acceptance suite.

/// Line profile assembled from the [signal] and [relay] sections.
LineProfile profile_from_config(const RunConfig& config);

/// Scenario grid assembled from the [dataset] and [attack] sections.
ScenarioGrid grid_from_config(const RunConfig& config);

/// Normalized training arrays from a dataset (windows divided by i_nom).
void dataset_to_arrays(const Dataset& ds, double i_nom_ka,
                       std::vector<std::vector<double>>& xs, std::vector<std::uint8_t>& ys);

/// Stratified, seeded carve-out of a validation share.
void carve_validation(std::vector<std::vector<double>>& xs, std::vector<std::uint8_t>& ys,
                      double val_fraction, std::uint64_t seed,
                      std::vector<std::vector<double>>& val_x, std::vector<std::uint8_t>& val_y);

} // namespace mivs::cmd
