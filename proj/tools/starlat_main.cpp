// starlat — exact enumeration of star operations on finite algebras.
//
// Subcommands:
//   count      compute lambda (and theta, bounds, closed forms) per q
//   sweep      count in parallel across a q list, with series checks
//   enumerate  list every operation of one instance by its fixed set
//   classes    list the equivalence classes of the working family
//   poset      emit the class poset (dot digraph, or JSON cover list)
//   verify     run the full per-instance verification battery
//   selftest   recompute the worked examples and check them
//
// Exit codes: 0 ok, 1 verification mismatch, 2 usage, 3 budget exhausted.

#include "starlat/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"star-operation counter for finite algebras"};
    app.require_subcommand(1);

    starlat::RunConfig cfg;
    std::string q_text, family_text = "auto";

    auto add_common = [&](CLI::App* sub, bool needs_shape, bool needs_q) {
        auto* shape_opt =
            sub->add_option("-s,--shape", cfg.shape_text,
                            "shape list, e.g. '1,3' or '3,1+1,1'");
        auto* q_opt = sub->add_option("-q,--q", q_text,
                                      "comma-separated q list, e.g. 2,3,4");
        if (needs_shape) shape_opt->required();
        if (needs_q) q_opt->required();
        sub->add_option("--family", family_text, "f0, f1, or auto")
            ->default_str("auto");
        sub->add_option("--out", cfg.out_format, "text, json, or csv")
            ->check(CLI::IsMember({"text", "json", "csv"}))
            ->default_str("text");
        sub->add_option("--cache", cfg.cache_dir,
                        "cache directory (default: $STARLAT_CACHE)");
        sub->add_option("--jobs", cfg.jobs, "worker threads for sweep")
            ->check(CLI::PositiveNumber);
        sub->add_option("--max-classes", cfg.budget.max_classes,
                        "abort when the class count exceeds this");
        sub->add_option("--max-elements", cfg.budget.max_elements,
                        "abort when |B| exceeds this");
        sub->add_option("--epsilon", cfg.epsilon,
                        "slack used by the asymptotic bound checks");
        sub->add_flag("--cross-check", cfg.cross_check,
                      "run the dual enumerator and compare");
        sub->add_flag("--no-timings", [&](std::int64_t) {
            cfg.include_timings = false;
        }, "omit wall-clock fields from the output");
    };

    add_common(app.add_subcommand("count", "exact counts per q"), true, true);
    add_common(app.add_subcommand("sweep", "parallel counts across a q list"),
               true, true);
    add_common(app.add_subcommand("enumerate", "list operations of one instance"),
               true, true);
    add_common(app.add_subcommand("classes", "list working-family classes"),
               true, true);
    add_common(app.add_subcommand("poset", "class poset as dot or JSON"),
               true, true);
    add_common(app.add_subcommand("verify", "per-instance verification battery"),
               true, true);
    add_common(app.add_subcommand("selftest", "recheck the worked examples"),
               false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    try {
        if (!q_text.empty()) cfg.qs = starlat::parse_q_list(q_text);
        cfg.family = starlat::parse_family_flag(family_text);
    } catch (const starlat::usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    return starlat::run_command(cfg, std::cout, std::cerr);
}
