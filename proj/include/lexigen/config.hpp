#pragma once

// Run configuration. Sources are layered: built-in defaults, then a flat
// "key = value" file, then command-line flags (which use the same keys).

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexigen/error.hpp"
#include "lexigen/io.hpp"
#include "lexigen/prompt.hpp"
#include "lexigen/rate_limit.hpp"
#include "lexigen/unicode.hpp"

namespace lexigen {

enum class ProviderMode { Mock, Live };

inline std::string_view mode_name(ProviderMode m) { return m == ProviderMode::Mock ? "mock" : "live"; }

struct RunConfig {
    std::string template_id = "literal";
    BatchConfig batch;
    bool max_tokens_set = false;
    ProviderMode mode = ProviderMode::Mock;
    std::optional<std::uint64_t> seed;
    std::string endpoint;
    std::size_t workers = 4;
    RetryPolicy retry;
    std::chrono::seconds timeout{120};
    std::string presets_path;

    // Mock fault injection, for exercising retry and resume paths.
    std::set<std::string> mock_misaligned;
    std::set<std::string> mock_failing;
    std::uint32_t mock_dim = 256;

    std::string es_wordlist;
    std::string en_wordlist;
    double spanish_max_fraction = 0.05;
    double english_min_fraction = 0.2;

    // Max tokens per prompt: explicit value, else the preset for the match size,
    // else 200 per lemma.
    int effective_max_tokens(std::span<const ThroughputRow> presets) const {
        if (max_tokens_set)
            return batch.max_tokens;
        if (const ThroughputRow *row = find_preset(presets, batch.match_size))
            return row->max_tokens;
        return std::max(100, 200 * batch.match_size);
    }

    void set(std::string_view key, std::string_view value);

    // Mock mode requires a seed; live mode requires an endpoint (the credential is
    // checked when the provider is built).
    void validate_providers() const {
        if (mode == ProviderMode::Mock && !seed)
            throw ConfigError("mock mode requires a seed (--seed or seed = N)");
        if (mode == ProviderMode::Live && endpoint.empty())
            throw ConfigError("live mode requires an endpoint (--endpoint or endpoint = URL)");
    }
};

namespace detail {

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const char *end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
    return out;
}

inline double parse_real(std::string_view key, std::string_view value) {
    std::string s(value);
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(s, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used == 0 || used != s.size())
        throw ConfigError("invalid value '" + s + "' for " + std::string(key));
    return out;
}

inline std::set<std::string> parse_list(std::string_view value) {
    std::set<std::string> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        std::size_t comma = value.find(',', pos);
        if (comma == std::string_view::npos)
            comma = value.size();
        const std::string item = unicode::trim(value.substr(pos, comma - pos));
        if (!item.empty())
            out.insert(unicode::nfc(item));
        pos = comma + 1;
    }
    return out;
}

} // namespace detail

inline void RunConfig::set(std::string_view key, std::string_view raw) {
    const std::string value = unicode::trim(raw);
    using detail::parse_number;
    using detail::parse_real;
    if (key == "template") {
        templates::get(value);
        template_id = value;
    } else if (key == "match_size") {
        batch.match_size = parse_number<int>(key, value);
    } else if (key == "max_tokens") {
        batch.max_tokens = parse_number<int>(key, value);
        max_tokens_set = true;
    } else if (key == "temperature") {
        batch.temperature = parse_real(key, value);
    } else if (key == "price_per_1k_tokens_eur") {
        batch.price_per_1k_tokens_eur = parse_real(key, value);
    } else if (key == "mode") {
        if (value == "mock")
            mode = ProviderMode::Mock;
        else if (value == "live")
            mode = ProviderMode::Live;
        else
            throw ConfigError("mode must be 'mock' or 'live', got '" + value + "'");
    } else if (key == "seed") {
        seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "endpoint") {
        endpoint = value;
    } else if (key == "workers") {
        workers = parse_number<std::size_t>(key, value);
        if (workers == 0)
            throw ConfigError("workers must be >= 1");
    } else if (key == "rpm") {
        retry.rpm = parse_number<std::uint32_t>(key, value);
        if (retry.rpm == 0)
            throw ConfigError("rpm must be >= 1");
    } else if (key == "max_retries") {
        retry.max_retries = parse_number<std::uint32_t>(key, value);
    } else if (key == "base_backoff_ms") {
        retry.base_backoff = std::chrono::milliseconds(parse_number<std::int64_t>(key, value));
    } else if (key == "max_backoff_ms") {
        retry.max_backoff = std::chrono::milliseconds(parse_number<std::int64_t>(key, value));
    } else if (key == "timeout_s") {
        timeout = std::chrono::seconds(parse_number<std::int64_t>(key, value));
    } else if (key == "presets") {
        presets_path = value;
    } else if (key == "mock_misaligned") {
        mock_misaligned = detail::parse_list(value);
    } else if (key == "mock_failing") {
        mock_failing = detail::parse_list(value);
    } else if (key == "mock_dim") {
        mock_dim = parse_number<std::uint32_t>(key, value);
        if (mock_dim == 0)
            throw ConfigError("mock_dim must be >= 1");
    } else if (key == "es_wordlist") {
        es_wordlist = value;
    } else if (key == "en_wordlist") {
        en_wordlist = value;
    } else if (key == "spanish_max_fraction") {
        spanish_max_fraction = parse_real(key, value);
    } else if (key == "english_min_fraction") {
        english_min_fraction = parse_real(key, value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// "key = value" lines; blank lines and '#' comments ignored.
inline ConfigEntries parse_config_text(std::string_view text) {
    unicode::require_utf8(text, "config");
    ConfigEntries out;
    const auto lines = io::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = unicode::trim(lines[i]);
        if (line.empty() || line.front() == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(i + 1) + ": expected key = value");
        std::string key = unicode::trim(std::string_view(line).substr(0, eq));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(i + 1) + ": empty key");
        out.emplace_back(std::move(key), unicode::trim(std::string_view(line).substr(eq + 1)));
    }
    return out;
}

inline RunConfig build_config(const std::optional<std::filesystem::path> &file,
                              const ConfigEntries &flags) {
    RunConfig cfg;
    if (file) {
        std::string text;
        try {
            text = io::read_file(*file);
        } catch (const IoError &e) {
            throw ConfigError(e.what());
        }
        for (const auto &[k, v] : parse_config_text(text))
            cfg.set(k, v);
    }
    for (const auto &[k, v] : flags)
        cfg.set(k, v);
    cfg.batch.validate();
    return cfg;
}

} // namespace lexigen
