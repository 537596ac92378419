#include <iostream>

#include <CLI11.hpp>

#include "linkmine/profile.hpp"
#include "linkmine/synth.hpp"
#include "linkmine/util.hpp"

// Regenerates the bundled synthetic corpus (or variants of it).  The
// output depends only on the flags, so a fixed invocation is repeatable
// byte for byte.
int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic profile corpus"};
    linkmine::SynthConfig config;
    std::string out = "synthetic_corpus.jsonl";
    app.add_option("--count", config.count, "Number of profiles");
    app.add_option("--seed", config.seed, "Deterministic seed");
    app.add_option("--incomplete", config.incomplete_rate,
                   "Fraction failing the min-content filter");
    app.add_option("--foreign", config.foreign_rate,
                   "Fraction with non-English positions");
    app.add_option("--out", out, "Output JSON-lines path");
    CLI11_PARSE(app, argc, argv);

    try {
        const linkmine::Dataset ds = linkmine::generate_corpus(config);
        linkmine::write_profiles_jsonl(ds, out);
        std::cout << "wrote " << ds.profiles.size() << " profiles to " << out
                  << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
