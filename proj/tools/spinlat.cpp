#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "spinlat/experiments.hpp"

using namespace spinlat;

int main(int argc, char** argv) {
    CLI::App app{"spinlat: finite-range spin dynamics simulation and verification engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int replicas = 0;
    int workers = -1;
    std::string out_dir;
    std::string format;

    std::string kind;
    for (const char* name : {"simulate", "wsm", "survival", "stability", "identities", "badbox"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file (JSON)")->required();
        sub->add_option("--seed", seed, "master seed override")->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--replicas", replicas, "replica count override");
        sub->add_option("--workers", workers, "worker thread count (0 = hardware)");
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--format", format, "csv or json");
        sub->callback([&kind, name] { kind = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
        if (cfg.kind != kind)
            throw schema_error("config is for experiment '" + cfg.kind + "', invoked as '" + kind + "'");
        if (seed_set) cfg.seed = seed;
        if (replicas > 0) cfg.replicas = replicas;
        if (workers >= 0) cfg.workers = workers;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!format.empty()) cfg.format = format;

        const RunResult result = run_experiment(cfg);
        write_artifacts(result, cfg.out_dir);
        for (const auto& [name, content] : result.artifacts)
            std::printf("wrote %s/%s (%zu bytes)\n", cfg.out_dir.c_str(), name.c_str(), content.size());
        return 0;
    } catch (const schema_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const contract_error& e) {
        std::fprintf(stderr, "contract error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
