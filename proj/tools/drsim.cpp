// drsim command-line interface: generate / train / detect / isolate /
// simulate / evaluate, plus a pipeline command chaining them all.
//
// Exit codes: 0 success, 1 usage or config error, 2 data error.
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "drsim/commands.hpp"

namespace {

int run(const std::function<void()>& fn) {
    try {
        fn();
        return 0;
    } catch (const drsim::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"resilient demand-response scheduling simulator"};
    app.require_subcommand(1);

    std::string config, corpus, model, out;
    std::string classifier = "csr", isolator = "beam", scenario = "attack";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int k = 0, method = 0;
    std::vector<std::string> reports;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the generator seed")
            ->each([&](const std::string&) { seed_set = true; });
    };

    CLI::App* generate = app.add_subcommand("generate", "generate a synthetic corpus");
    generate->add_option("--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
    generate->add_option("--out", out, "output corpus directory")->required();
    add_seed(generate);

    CLI::App* train = app.add_subcommand("train", "fit the cluster model on the train split");
    train->add_option("--corpus", corpus, "corpus directory")->required();
    train->add_option("--out", out, "model file path")->required();
    train->add_option("--k", k, "cluster count (default: config or desk-scale rule)");

    CLI::App* detect = app.add_subcommand("detect", "classify the test split");
    detect->add_option("--corpus", corpus, "corpus directory")->required();
    detect->add_option("--model", model, "cluster model file")->required();
    detect->add_option("--classifier", classifier, "csr|sr")->check(CLI::IsMember({"csr", "sr"}));
    detect->add_option("--out", out, "report directory")->required();

    CLI::App* isolate = app.add_subcommand("isolate", "locate attacked slots on attacked test days");
    isolate->add_option("--corpus", corpus, "corpus directory")->required();
    isolate->add_option("--model", model, "cluster model file")->required();
    isolate->add_option("--isolator", isolator, "beam|lof|csr")
        ->check(CLI::IsMember({"beam", "lof", "csr"}));
    isolate->add_option("--out", out, "report directory")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "run the DR pipeline per attacked day");
    simulate->add_option("--corpus", corpus, "corpus directory")->required();
    simulate->add_option("--model", model, "cluster model file (mitigated scenario)");
    simulate->add_option("--scenario", scenario, "clean|attack|mitigated")
        ->check(CLI::IsMember({"clean", "attack", "mitigated"}));
    simulate->add_option("--method", method, "mitigation method 1..6");
    simulate->add_option("--isolator", isolator, "beam|lof|csr")
        ->check(CLI::IsMember({"beam", "lof", "csr"}));
    simulate->add_option("--out", out, "report directory")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "join reports into evaluation tables");
    evaluate->add_option("--reports", reports, "report directories")->required();
    evaluate->add_option("--out", out, "output directory")->required();

    CLI::App* pipeline = app.add_subcommand("pipeline", "generate, train, detect, isolate, simulate, evaluate");
    pipeline->add_option("--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
    pipeline->add_option("--out", out, "output directory")->required();
    add_seed(pipeline);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;   // usage errors are exit 1, help is success
    }

    std::optional<std::filesystem::path> config_path;
    if (!config.empty()) config_path = config;
    std::optional<std::uint64_t> seed_opt;
    if (seed_set) seed_opt = seed;

    if (generate->parsed())
        return run([&] { drsim::cmd_generate({config_path, out, seed_opt}); });
    if (train->parsed()) return run([&] { drsim::cmd_train({corpus, out, k}); });
    if (detect->parsed()) return run([&] { drsim::cmd_detect({corpus, model, classifier, out}); });
    if (isolate->parsed()) return run([&] { drsim::cmd_isolate({corpus, model, isolator, out}); });
    if (simulate->parsed()) {
        std::optional<std::filesystem::path> model_path;
        if (!model.empty()) model_path = model;
        return run([&] {
            drsim::cmd_simulate({corpus, model_path, scenario, method, isolator, out});
        });
    }
    if (evaluate->parsed()) {
        std::vector<std::filesystem::path> dirs(reports.begin(), reports.end());
        return run([&] { drsim::cmd_evaluate({dirs, out}); });
    }
    if (pipeline->parsed())
        return run([&] { drsim::cmd_pipeline({config_path, out, seed_opt}); });
    return 1;
}
