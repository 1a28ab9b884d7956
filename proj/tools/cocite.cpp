// cocite: co-citation kinetics toolkit.
//
// Subcommands run individual pipeline stages over a citation graph given as
// nodelist/edgelist CSV files; `all` chains them. Configuration comes from a
// flat key = value file, overridable key by key on the command line. Every
// stage writes a manifest so its artifacts are reproducible from the manifest
// alone.

#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "cocite/config.hpp"
#include "cocite/errors.hpp"
#include "cocite/pipeline.hpp"

namespace {

struct CliState {
    std::string config_path;
    bool force = false;
    std::vector<std::pair<std::string, std::string>> overrides; // in parse order
};

void add_common_options(CLI::App* sub, CliState& state) {
    sub->add_option("--config", state.config_path, "configuration file (key = value lines)");
    sub->add_flag("--force", state.force, "overwrite artifacts from earlier runs");
    for (const auto& spec : cocite::config_detail::key_specs()) {
        sub->add_option_function<std::string>(
                "--" + spec.name,
                [&state, key = spec.name](const std::string& value) {
                    state.overrides.emplace_back(key, value);
                },
                "override config key " + spec.name)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"co-citation kinetics toolkit"};
    app.require_subcommand(1);
    CliState state;

    CLI::App* cmd_ingest = app.add_subcommand("ingest", "validate inputs and curate the graph");
    CLI::App* cmd_pairs = app.add_subcommand("pairs", "enumerate and deduplicate co-cited pairs");
    CLI::App* cmd_count = app.add_subcommand("count", "total and per-year co-citation counts");
    CLI::App* cmd_detect =
        app.add_subcommand("detect", "delayed co-citations, band screen, van Raan test");
    CLI::App* cmd_stats = app.add_subcommand("stats", "histogram, ECDF, percentiles, summary");
    CLI::App* cmd_subjects = app.add_subcommand("subjects", "subject co-occurrence graph export");
    CLI::App* cmd_gen = app.add_subcommand("gen", "seeded synthetic corpus with planted truth");
    CLI::App* cmd_all = app.add_subcommand("all", "full pipeline, ingest through subjects");
    for (CLI::App* sub : {cmd_ingest, cmd_pairs, cmd_count, cmd_detect, cmd_stats, cmd_subjects,
                          cmd_gen, cmd_all})
        add_common_options(sub, state);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        cocite::PipelineConfig config;
        if (!state.config_path.empty()) config = cocite::load_config_file(state.config_path);
        for (const auto& [key, value] : state.overrides)
            cocite::apply_config_entry(config, key, value);

        if (app.got_subcommand(cmd_ingest)) cocite::pipeline::run_ingest(config, state.force);
        else if (app.got_subcommand(cmd_pairs)) cocite::pipeline::run_pairs(config, state.force);
        else if (app.got_subcommand(cmd_count)) cocite::pipeline::run_count(config, state.force);
        else if (app.got_subcommand(cmd_detect)) cocite::pipeline::run_detect(config, state.force);
        else if (app.got_subcommand(cmd_stats)) cocite::pipeline::run_stats(config, state.force);
        else if (app.got_subcommand(cmd_subjects))
            cocite::pipeline::run_subjects(config, state.force);
        else if (app.got_subcommand(cmd_gen)) cocite::pipeline::run_gen(config, state.force);
        else if (app.got_subcommand(cmd_all)) cocite::pipeline::run_all(config, state.force);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cocite::exit_code_for(e);
    }
    return 0;
}
