#pragma once

#include <map>
#include <string>
#include <vector>

#include "spinlat/lattice.hpp"
#include "spinlat/rates.hpp"

namespace spinlat {

inline constexpr const char* kVersion = "spinlat 0.1.0";

struct GeometryCfg {
    int dim = 1;
    std::vector<int> sides;
    int range = 1;
    std::string boundary = "periodic";
};

struct ModelCfg {
    double beta = 1.0;
    double field = 0.0;
    double delta = 0.0;
    double nn_coupling = 1.0;
    bool nn = true;  // false: explicit offsets below
    std::vector<std::pair<Coords, double>> couplings;
};

struct SurvivalCfg {
    std::vector<double> horizons;
    std::string method = "sandwich";
};

struct WsmCfg {
    int dim = 1;
    std::vector<int> lengths;
    double coupling = 1.0;  // temperature absorbed
    double field = 0.3;
    std::string method = "transfer";
    double burn_in = 8.0;
    int samples = 2000;
    double spacing = 0.5;
};

struct SimulateCfg {
    double t_end = 1.0;
    std::vector<double> sample_times;
    std::string initial = "plus";
    bool log_events = false;
};

struct StabilityCfg {
    std::vector<double> horizons;
    int survival_replicas = 1000;
};

struct IdentitiesCfg {
    int graphs = 100;
    int max_vertices = 6;
    int truncation = 32;
};

struct BadboxCfg {
    std::vector<double> n_values;
    double tau0 = 0.0;                  // 0: fit it from a survival scan first
    double m_lambda_multiplier = 0.0;   // 0: default spatial side 2 r ceil(N tau0)
    double l_override = 0.0;
    std::vector<double> fit_horizons = {0.5, 1.0, 2.0, 3.0};
    int fit_replicas = 4000;
};

struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 1;
    int replicas = 1000;
    int workers = 0;  // 0: hardware default
    std::string out_dir = ".";
    std::string format = "csv";

    GeometryCfg geometry;
    ModelCfg model;
    SurvivalCfg survival;
    WsmCfg wsm;
    SimulateCfg simulate;
    StabilityCfg stability;
    IdentitiesCfg identities;
    BadboxCfg badbox;

    std::uint64_t config_hash = 0;

    static ExperimentConfig from_json_string(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);

    GeometryPtr make_geometry_ptr() const;
    CouplingKernel make_kernel() const;
};

struct RunResult {
    // artifact file name -> content; written in this order
    std::vector<std::pair<std::string, std::string>> artifacts;

    const std::string* find(const std::string& name) const;
};

// Deterministic given (config, seed): exact methods reproduce outputs
// byte-identically, Monte Carlo ones to RNG-replay exactness, regardless of
// the worker count.
RunResult run_experiment(const ExperimentConfig& cfg);

void write_artifacts(const RunResult& result, const std::string& out_dir);

}  // namespace spinlat
