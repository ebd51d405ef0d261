#include "hawkrank/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace hawkrank;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("-c,--config", c.config, "key=value config file");
    app->add_option("-s,--set", c.sets, "override one key, e.g. --set tau=0.05")->take_all();
}

RunConfig resolve(const Common& c)
{
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Causal discovery of Hawkes processes with latent confounders"};
    app.require_subcommand(1);

    Common c_sim, c_bin, c_disc, c_eval, c_sweep, c_ing;
    std::string events_path, panel_path, oracle_path, pred_path, truth_path, alarms_path;

    auto* sim = app.add_subcommand("simulate", "draw a truth graph and simulate events or a discrete panel");
    add_common(sim, c_sim);

    auto* bin = app.add_subcommand("bin", "bin an events file into a count panel");
    add_common(bin, c_bin);
    bin->add_option("events", events_path, "events CSV")->required();

    auto* disc = app.add_subcommand("discover", "recover the causal graph from a panel or a population oracle");
    add_common(disc, c_disc);
    disc->add_option("panel", panel_path, "panel CSV");
    disc->add_option("--oracle", oracle_path, "truth graph for exact population covariances");

    auto* ev = app.add_subcommand("eval", "score a discovered graph against the truth");
    add_common(ev, c_eval);
    ev->add_option("predicted", pred_path, "discovered graph")->required();
    ev->add_option("truth", truth_path, "truth graph")->required();

    auto* sweep = app.add_subcommand("sweep", "simulate and score a grid of settings");
    add_common(sweep, c_sweep);

    auto* ing = app.add_subcommand("ingest", "convert an alarm log into an events file");
    add_common(ing, c_ing);
    ing->add_option("alarms", alarms_path, "alarm CSV")->required();

    auto* keys = app.add_subcommand("keys", "list config keys with defaults");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim)
            return cmd_simulate(resolve(c_sim), std::cout);
        if (*bin)
            return cmd_bin(resolve(c_bin), events_path, std::cout);
        if (*disc)
            return cmd_discover(resolve(c_disc), panel_path, oracle_path, std::cout);
        if (*ev)
            return cmd_eval(resolve(c_eval), pred_path, truth_path, std::cout);
        if (*sweep)
            return cmd_sweep(resolve(c_sweep), std::cout);
        if (*ing)
            return cmd_ingest(resolve(c_ing), alarms_path, std::cout);
        if (*keys) {
            const RunConfig def;
            for (const auto& k : RunConfig::keys())
                std::cout << k << " = " << def.get(k) << "    # " << RunConfig::help(k) << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitInput;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
