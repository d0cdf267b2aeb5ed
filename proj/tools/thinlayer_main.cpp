#include "thinlayer/app.hpp"
#include "thinlayer/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Layered porous-media convection and thin-layer limit harness"};
    app.require_subcommand(1);

    thinlayer::CommandOptions opt;
    std::string out;
    std::string record;
    std::vector<double> eps;
    double t_end = -1.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "Run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output directory (default: timestamped)");
    };

    auto* simulate = app.add_subcommand("simulate", "Integrate one trajectory and audit its energy estimates");
    add_common(simulate);
    simulate->add_option("--T", t_end, "Final time, overriding time.t_end");

    auto* sweep = app.add_subcommand("sweep-epsilon", "Finite-time convergence as the thin layer vanishes");
    add_common(sweep);
    sweep->add_option("--eps", eps, "Layer thicknesses, overriding thin.epsilons")->delimiter(',');
    sweep->add_option("--T", t_end, "Final time, overriding time.t_end");

    auto* attractor = app.add_subcommand("attractor", "Attractor samples and semi-distances across the family");
    add_common(attractor);
    attractor->add_option("--eps", eps, "Layer thicknesses, overriding thin.epsilons")->delimiter(',');

    auto* verify = app.add_subcommand("verify", "Audit a recorded trajectory against the estimates");
    add_common(verify);
    verify->add_option("--record", record, "Trajectory record")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    const CLI::App* chosen = app.get_subcommands().front();
    opt.command = chosen->get_name();
    opt.out = out.empty() ? thinlayer::default_output_dir(opt.command) : std::filesystem::path(out);
    if (!record.empty()) {
        opt.record = record;
    }
    if (!eps.empty()) {
        opt.epsilons = eps;
    }
    if (t_end >= 0.0) {
        opt.t_end = t_end;
    }

    try {
        return thinlayer::dispatch(opt, std::cout);
    } catch (const thinlayer::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
