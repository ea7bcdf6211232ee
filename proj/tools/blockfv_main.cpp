// Case runner front end: `run` executes a JSON case, `compare` diffs two
// run directories, `report` prints the timing breakdown of a run.

#include "blockfv/case_runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"block-coupled finite-volume solver kit"};
    app.require_subcommand(1);

    // run
    std::string caseFile, outDir, backendName;
    int ranks = -1, engines = -1;
    bool deterministic = false;
    unsigned seed = 0;
    bool seedSet = false;

    CLI::App* run = app.add_subcommand("run", "run a case");
    run->add_option("case", caseFile, "case JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--ranks", ranks, "number of simulated ranks");
    run->add_option("--engines", engines, "number of solver engines");
    run->add_option("--backend", backendName, "host | engine")
        ->check(CLI::IsMember({"host", "engine"}));
    run->add_flag("--deterministic", deterministic, "single-threaded round-robin harness");
    run->add_option("--seed", seed, "rng seed recorded in the report")
        ->each([&seedSet](const std::string&) { seedSet = true; });
    run->add_option("--out", outDir, "output directory (overrides the case file)");

    // compare
    std::string dirA, dirB;
    double threshold = 1e-5;
    CLI::App* cmp = app.add_subcommand("compare", "compare two run directories");
    cmp->add_option("a", dirA, "first run directory")->required();
    cmp->add_option("b", dirB, "second run directory")->required();
    cmp->add_option("--threshold", threshold, "residual threshold for time-to-threshold");

    // report
    std::string reportDir;
    CLI::App* rep = app.add_subcommand("report", "timing breakdown of a run directory");
    rep->add_option("run-dir", reportDir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            fvb::CaseConfig cfg = fvb::CaseConfig::loadFile(caseFile);
            if (ranks > 0) cfg.partitioning.ranks = ranks;
            if (engines > 0) cfg.partitioning.engines = engines;
            if (!backendName.empty())
                cfg.backend = backendName == "host" ? fvb::Backend::HostLdu : fvb::Backend::EngineCsr;
            if (deterministic) cfg.deterministic = true;
            if (seedSet) cfg.seed = seed;
            if (!outDir.empty()) cfg.outputDir = outDir;
            if (cfg.outputDir.empty()) cfg.outputDir = "out/" + cfg.name;
            cfg.validate();

            const fvb::RunReport report = fvb::runCase(cfg);
            fvb::writeReports(report, cfg.outputDir);
            std::cout << cfg.name << ": " << report.iterations << " iterations, "
                      << (report.converged ? "converged" : "not converged") << ", "
                      << report.wallTime << " s -> " << cfg.outputDir << "\n";
        } else if (*cmp) {
            const fvb::RunReport a = fvb::loadReportDir(dirA);
            const fvb::RunReport b = fvb::loadReportDir(dirB);
            std::cout << fvb::compareRuns(a, b, threshold).toJson() << "\n";
        } else if (*rep) {
            const fvb::RunReport r = fvb::loadReportDir(reportDir);
            std::cout << fvb::emitTimingBreakdown(r).toText();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
