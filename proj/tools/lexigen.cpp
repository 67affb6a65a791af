#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lexigen/commands.hpp"

namespace {

struct Flags {
    std::string config;
    std::string template_id, match_size, max_tokens, temperature, mode, seed, workers, endpoint, presets;
};

void add_run_flags(CLI::App &cmd, Flags &f) {
    cmd.add_option("--config", f.config, "key = value config file");
    cmd.add_option("--template", f.template_id, "prompt template id");
    cmd.add_option("--match-size", f.match_size, "lemmas per prompt");
    cmd.add_option("--max-tokens", f.max_tokens, "max tokens per prompt");
    cmd.add_option("--temperature", f.temperature, "sampling temperature");
    cmd.add_option("--mode", f.mode, "mock or live");
    cmd.add_option("--seed", f.seed, "mock provider seed");
    cmd.add_option("--workers", f.workers, "concurrent requests");
    cmd.add_option("--endpoint", f.endpoint, "live provider base URL");
    cmd.add_option("--presets", f.presets, "throughput presets CSV");
}

lexigen::cli::CommandArgs to_args(const Flags &f) {
    lexigen::cli::CommandArgs a;
    if (!f.config.empty())
        a.config_file = f.config;
    const std::pair<const char *, const std::string *> entries[] = {
        {"template", &f.template_id}, {"match_size", &f.match_size}, {"max_tokens", &f.max_tokens},
        {"temperature", &f.temperature}, {"mode", &f.mode}, {"seed", &f.seed},
        {"workers", &f.workers}, {"endpoint", &f.endpoint}, {"presets", &f.presets},
    };
    for (const auto &[key, value] : entries)
        if (!value->empty())
            a.overrides.emplace_back(key, *value);
    return a;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Generate and evaluate LLM dictionary definitions"};
    app.require_subcommand(1);

    Flags flags;
    std::string lemmas, refs, dict, out, report;
    bool audit = false;

    auto *estimate = app.add_subcommand("estimate", "cost and time for a lemma list");
    add_run_flags(*estimate, flags);
    estimate->add_option("--lemmas", lemmas, "lemma list")->required();

    auto *generate = app.add_subcommand("generate", "generate definitions (resumable)");
    add_run_flags(*generate, flags);
    generate->add_option("--lemmas", lemmas, "lemma list")->required();
    generate->add_option("--out", out, "generated dictionary (JSONL, appended)")->required();

    auto *evaluate = app.add_subcommand("evaluate", "score a generated dictionary");
    add_run_flags(*evaluate, flags);
    evaluate->add_option("--dict", dict, "generated dictionary")->required();
    evaluate->add_option("--refs", refs, "reference dictionary")->required();
    evaluate->add_option("--out", out, "report JSON path")->required();
    evaluate->add_flag("--audit-prompts", audit, "flag tokenizer artifacts from unquoted templates");

    auto *errors = app.add_subcommand("errors", "classify generation errors");
    add_run_flags(*errors, flags);
    errors->add_option("--dict", dict, "generated dictionary")->required();
    errors->add_option("--out", out, "per-lemma labels (JSONL)");
    errors->add_option("--report", report, "report JSON to update");
    errors->add_flag("--audit-prompts", audit, "flag tokenizer artifacts from unquoted templates");

    auto *show = app.add_subcommand("report", "print a saved report");
    show->add_option("--report", report, "report JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lexigen::cli::kConfigError;
    }

    lexigen::cli::CommandArgs args = to_args(flags);
    args.lemmas = lemmas;
    args.refs = refs;
    args.dict = dict;
    args.out = out;
    args.report = report;
    args.audit_prompts = audit;

    if (estimate->parsed())
        return lexigen::cli::cmd_estimate(args, std::cout, std::cerr);
    if (generate->parsed())
        return lexigen::cli::cmd_generate(args, std::cout, std::cerr);
    if (evaluate->parsed())
        return lexigen::cli::cmd_evaluate(args, std::cout, std::cerr);
    if (errors->parsed())
        return lexigen::cli::cmd_errors(args, std::cout, std::cerr);
    return lexigen::cli::cmd_report(args, std::cout, std::cerr);
}
