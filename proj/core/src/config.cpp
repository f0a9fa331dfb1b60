#include "boga/config.hpp"

#include "boga/log.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace boga {

using json = nlohmann::json;

namespace {

std::string line_of_offset(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return std::to_string(line);
}

json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ":" + line_of_offset(text, e.byte) +
                          ": " + std::string(e.what()));
    }
}

[[noreturn]] void missing(const std::string& path) {
    throw ConfigError("config: missing required field '" + path + "'");
}

const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) missing(path.empty() ? key : path + "." + key);
    return j.at(key);
}

template <typename T>
T as(const json& j, const std::string& path) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: field '" + path + "' has the wrong type");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return as<T>(j.at(key), path + "." + key);
}

Direction direction_from(const std::string& s, const std::string& path) {
    if (s == "maximize") return Direction::maximize;
    if (s == "minimize") return Direction::minimize;
    throw ConfigError("config: field '" + path + "' must be maximize|minimize");
}

SelectionStrategy parse_strategy(const json& j, const std::string& path) {
    SelectionStrategy s;
    const std::string kind = as<std::string>(require(j, "kind", path), path + ".kind");
    if (kind == "top_k") {
        s.kind = SelectionStrategy::Kind::top_k;
    } else if (kind == "top_fraction_uniform") {
        s.kind = SelectionStrategy::Kind::top_fraction_uniform;
        s.fraction = as<double>(require(j, "fraction", path), path + ".fraction");
    } else if (kind == "exponential_rank") {
        s.kind = SelectionStrategy::Kind::exponential_rank;
        s.temperature = as<double>(require(j, "temperature", path), path + ".temperature");
    } else if (kind == "threshold") {
        s.kind = SelectionStrategy::Kind::threshold;
        s.threshold = as<double>(require(j, "threshold", path), path + ".threshold");
    } else {
        throw ConfigError("config: field '" + path + ".kind' must be "
                          "top_k|top_fraction_uniform|exponential_rank|threshold");
    }
    return s;
}

SchedulePhase parse_phase(const json& j, const std::string& path) {
    SchedulePhase p;
    const std::string acq =
        as<std::string>(require(j, "acquisition", path), path + ".acquisition");
    p.acquisition.kind = acquisition_kind_from_name(acq);
    p.generations = as<int>(require(j, "generations", path), path + ".generations");
    p.m_select = as<int>(require(j, "m_select", path), path + ".m_select");
    p.k_propose = as<int>(require(j, "k_propose", path), path + ".k_propose");
    p.elite_k = get_or<int>(j, "elite_k", path, 10);
    if (j.contains("elite_strategy"))
        p.elite_strategy = parse_strategy(j.at("elite_strategy"), path + ".elite_strategy");
    if (j.contains("acquisition_kwargs")) {
        const json& kw = j.at("acquisition_kwargs");
        const std::string kwp = path + ".acquisition_kwargs";
        p.acquisition.ucb_beta = get_or<double>(kw, "ucb_beta", kwp, p.acquisition.ucb_beta);
        const std::string mode = get_or<std::string>(kw, "select_mode", kwp, "strict_top");
        if (mode == "strict_top") {
            p.acquisition.select_mode = AcquisitionSpec::SelectMode::strict_top;
        } else if (mode == "uniform_top") {
            p.acquisition.select_mode = AcquisitionSpec::SelectMode::uniform_top;
        } else {
            throw ConfigError("config: field '" + kwp + ".select_mode' must be "
                              "strict_top|uniform_top");
        }
        p.acquisition.uniform_top_pool =
            get_or<int>(kw, "uniform_top_pool", kwp, p.acquisition.uniform_top_pool);
    }
    return p;
}

CampaignConfig parse_campaign(const json& j, const std::string& origin) {
    CampaignConfig c;

    const json& obj = require(j, "objective", "");
    c.objective.name = as<std::string>(require(obj, "name", "objective"), "objective.name");
    c.objective.direction = direction_from(
        get_or<std::string>(obj, "direction", "objective", "maximize"), "objective.direction");
    const std::string kind = get_or<std::string>(obj, "kind", "objective", "builtin");
    if (kind == "builtin") {
        c.objective.kind = ObjectiveSpec::Kind::builtin;
        c.objective.landscape = builtin_landscape_from_name(
            get_or<std::string>(obj, "landscape", "objective", c.objective.name));
    } else if (kind == "mock") {
        c.objective.kind = ObjectiveSpec::Kind::mock;
        c.objective.landscape = builtin_landscape_from_name(
            get_or<std::string>(obj, "landscape", "objective", c.objective.name));
        c.objective.mock_latency_ms = get_or<int>(obj, "latency_ms", "objective", 0);
    } else if (kind == "external") {
        c.objective.kind = ObjectiveSpec::Kind::external;
        c.objective.external.command = as<std::vector<std::string>>(
            require(obj, "command", "objective"), "objective.command");
        c.objective.external.n_jobs = get_or<int>(obj, "n_jobs", "objective", 1);
        c.objective.external.timeout_ms = get_or<int>(obj, "timeout_ms", "objective", 10000);
    } else {
        throw ConfigError("config: field 'objective.kind' must be builtin|mock|external");
    }

    if (j.contains("initial_sequences")) {
        c.initial_sequences =
            as<std::vector<std::string>>(j.at("initial_sequences"), "initial_sequences");
    } else if (j.contains("initial_sequences_file")) {
        const auto file =
            as<std::string>(j.at("initial_sequences_file"), "initial_sequences_file");
        std::ifstream in(file);
        if (!in) throw ConfigError("config: cannot open initial_sequences_file '" + file + "'");
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) c.initial_sequences.push_back(line);
        }
    } else {
        missing("initial_sequences");
    }

    c.n_init = get_or<int>(j, "n_init", "", static_cast<int>(c.initial_sequences.size()));

    if (j.contains("mutation")) {
        const json& m = j.at("mutation");
        if (m.contains("rate")) {
            const double r = as<double>(m.at("rate"), "mutation.rate");
            c.mutation.substitution_rate = r;
            c.mutation.insertion_rate = r;
            c.mutation.deletion_rate = r;
        }
        c.mutation.substitution_rate =
            get_or<double>(m, "substitution_rate", "mutation", c.mutation.substitution_rate);
        c.mutation.insertion_rate =
            get_or<double>(m, "insertion_rate", "mutation", c.mutation.insertion_rate);
        c.mutation.deletion_rate =
            get_or<double>(m, "deletion_rate", "mutation", c.mutation.deletion_rate);
        c.mutation.min_length = get_or<std::size_t>(m, "min_length", "mutation", 1);
        c.mutation.max_length = get_or<std::size_t>(m, "max_length", "mutation", 1000);
    }

    if (j.contains("embedding")) {
        const json& e = j.at("embedding");
        const std::string encoder = get_or<std::string>(e, "encoder", "embedding", "physchem");
        if (encoder == "physchem") {
            c.embedding.encoder = EmbeddingConfig::Encoder::physchem;
        } else if (encoder == "table") {
            c.embedding.encoder = EmbeddingConfig::Encoder::table;
        } else {
            throw ConfigError("config: field 'embedding.encoder' must be physchem|table");
        }
        c.embedding.dipeptide = get_or<bool>(e, "dipeptide", "embedding", false);
        c.embedding.pca_components = get_or<int>(e, "pca_components", "embedding", 16);
        c.embedding.table_path = get_or<std::string>(e, "table_path", "embedding", "");
    }

    if (j.contains("surrogate")) {
        const json& s = j.at("surrogate");
        const std::string skind = get_or<std::string>(s, "kind", "surrogate", "deep_ensemble");
        if (skind == "deep_ensemble") {
            c.surrogate.kind = SurrogateKind::deep_ensemble;
        } else if (skind == "evidential") {
            c.surrogate.kind = SurrogateKind::evidential;
        } else {
            throw ConfigError("config: field 'surrogate.kind' must be deep_ensemble|evidential");
        }
        c.surrogate.hidden_sizes =
            get_or<std::vector<int>>(s, "hidden_sizes", "surrogate", c.surrogate.hidden_sizes);
        c.surrogate.ensemble_size =
            get_or<int>(s, "ensemble_size", "surrogate", c.surrogate.ensemble_size);
        c.surrogate.epochs = get_or<int>(s, "epochs", "surrogate", c.surrogate.epochs);
        c.surrogate.learning_rate =
            get_or<double>(s, "learning_rate", "surrogate", c.surrogate.learning_rate);
        c.surrogate.validation_fraction = get_or<double>(s, "validation_fraction", "surrogate",
                                                         c.surrogate.validation_fraction);
        c.surrogate.batch_size = get_or<int>(s, "batch_size", "surrogate", c.surrogate.batch_size);
        c.surrogate.evidential_lambda =
            get_or<double>(s, "evidential_lambda", "surrogate", c.surrogate.evidential_lambda);
        c.surrogate.seed = get_or<std::uint64_t>(s, "seed", "surrogate", 0);
    }

    const json& sched = require(j, "schedule", "");
    if (!sched.is_array() || sched.empty())
        throw ConfigError("config: field 'schedule' must be a non-empty array");
    for (std::size_t i = 0; i < sched.size(); ++i)
        c.schedule.push_back(parse_phase(sched[i], "schedule[" + std::to_string(i) + "]"));

    c.master_seed = get_or<std::uint64_t>(j, "master_seed", "", 0);
    c.output_dir = get_or<std::string>(j, "output_dir", "", "");
    const std::string src = get_or<std::string>(j, "elite_source", "", "history");
    if (src == "history") {
        c.elite_source = EliteSource::history;
    } else if (src == "last_generation") {
        c.elite_source = EliteSource::last_generation;
    } else {
        throw ConfigError("config: field 'elite_source' must be history|last_generation");
    }
    c.eval_jobs = get_or<int>(j, "eval_jobs", "", 1);
    c.surrogate_refit_interval = get_or<int>(j, "surrogate_refit_interval", "", 1);

    static const std::set<std::string> known = {
        "objective", "initial_sequences", "initial_sequences_file", "n_init",
        "mutation", "embedding", "surrogate", "schedule", "master_seed",
        "output_dir", "elite_source", "eval_jobs", "surrogate_refit_interval"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (known.count(key) == 0)
            log::warn(origin + ": unknown config key '" + key + "' ignored");
    }

    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return c;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

CampaignConfig parse_campaign_config_text(const std::string& text, const std::string& origin) {
    return parse_campaign(parse_json(text, origin), origin);
}

CampaignConfig parse_campaign_config_file(const std::filesystem::path& path) {
    return parse_campaign_config_text(read_file(path), path.string());
}

void SweepSpec::validate() const {
    if (k_propose_values.empty()) throw ConfigError("sweep: k_propose_values must be non-empty");
    std::set<int> distinct(k_propose_values.begin(), k_propose_values.end());
    if (distinct.size() != k_propose_values.size())
        throw ConfigError("sweep: duplicate k_propose values");
    if (seeds.empty()) throw ConfigError("sweep: seeds must be non-empty");
    if (m_select < 1) throw ConfigError("sweep: m_select must be >= 1");
    for (int k : k_propose_values)
        if (k < m_select) throw ConfigError("sweep: every k_propose must be >= m_select");
    if (output_dir.empty()) throw ConfigError("sweep: output_dir must be set");
}

SweepSpec parse_sweep_config_text(const std::string& text, const std::string& origin) {
    const json j = parse_json(text, origin);
    SweepSpec spec;
    spec.base = parse_campaign(require(j, "base", ""), origin);
    spec.k_propose_values =
        as<std::vector<int>>(require(j, "k_propose_values", ""), "k_propose_values");
    spec.seeds = as<std::vector<std::uint64_t>>(require(j, "seeds", ""), "seeds");
    spec.m_select = get_or<int>(j, "m_select", "",
                                spec.base.schedule.empty() ? 1 : spec.base.schedule[0].m_select);
    spec.output_dir = as<std::string>(require(j, "output_dir", ""), "output_dir");
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return spec;
}

SweepSpec parse_sweep_config_file(const std::filesystem::path& path) {
    return parse_sweep_config_text(read_file(path), path.string());
}

std::string campaign_config_to_json(const CampaignConfig& c) {
    json j;
    json obj;
    obj["name"] = c.objective.name;
    obj["direction"] = to_string(c.objective.direction);
    switch (c.objective.kind) {
    case ObjectiveSpec::Kind::builtin:
        obj["kind"] = "builtin";
        obj["landscape"] = to_string(c.objective.landscape);
        break;
    case ObjectiveSpec::Kind::mock:
        obj["kind"] = "mock";
        obj["landscape"] = to_string(c.objective.landscape);
        obj["latency_ms"] = c.objective.mock_latency_ms;
        break;
    case ObjectiveSpec::Kind::external:
        obj["kind"] = "external";
        obj["command"] = c.objective.external.command;
        obj["n_jobs"] = c.objective.external.n_jobs;
        obj["timeout_ms"] = c.objective.external.timeout_ms;
        break;
    }
    j["objective"] = obj;
    j["initial_sequences"] = c.initial_sequences;
    j["n_init"] = c.n_init;
    j["mutation"] = {{"substitution_rate", c.mutation.substitution_rate},
                     {"insertion_rate", c.mutation.insertion_rate},
                     {"deletion_rate", c.mutation.deletion_rate},
                     {"min_length", c.mutation.min_length},
                     {"max_length", c.mutation.max_length}};
    j["embedding"] = {
        {"encoder", c.embedding.encoder == EmbeddingConfig::Encoder::physchem ? "physchem" : "table"},
        {"dipeptide", c.embedding.dipeptide},
        {"pca_components", c.embedding.pca_components},
        {"table_path", c.embedding.table_path}};
    j["surrogate"] = {{"kind", to_string(c.surrogate.kind)},
                      {"hidden_sizes", c.surrogate.hidden_sizes},
                      {"ensemble_size", c.surrogate.ensemble_size},
                      {"epochs", c.surrogate.epochs},
                      {"learning_rate", c.surrogate.learning_rate},
                      {"validation_fraction", c.surrogate.validation_fraction},
                      {"batch_size", c.surrogate.batch_size},
                      {"evidential_lambda", c.surrogate.evidential_lambda},
                      {"seed", c.surrogate.seed}};
    json sched = json::array();
    for (const auto& p : c.schedule) {
        json phase;
        phase["acquisition"] = to_string(p.acquisition.kind);
        phase["generations"] = p.generations;
        phase["m_select"] = p.m_select;
        phase["k_propose"] = p.k_propose;
        phase["elite_k"] = p.elite_k;
        json strat;
        strat["kind"] = to_string(p.elite_strategy.kind);
        switch (p.elite_strategy.kind) {
        case SelectionStrategy::Kind::top_fraction_uniform:
            strat["fraction"] = p.elite_strategy.fraction;
            break;
        case SelectionStrategy::Kind::exponential_rank:
            strat["temperature"] = p.elite_strategy.temperature;
            break;
        case SelectionStrategy::Kind::threshold:
            strat["threshold"] = p.elite_strategy.threshold;
            break;
        case SelectionStrategy::Kind::top_k:
            break;
        }
        phase["elite_strategy"] = strat;
        json kw;
        kw["ucb_beta"] = p.acquisition.ucb_beta;
        kw["select_mode"] = p.acquisition.select_mode == AcquisitionSpec::SelectMode::strict_top
                                ? "strict_top"
                                : "uniform_top";
        kw["uniform_top_pool"] = p.acquisition.uniform_top_pool;
        phase["acquisition_kwargs"] = kw;
        sched.push_back(phase);
    }
    j["schedule"] = sched;
    j["master_seed"] = c.master_seed;
    j["output_dir"] = c.output_dir;
    j["elite_source"] = c.elite_source == EliteSource::history ? "history" : "last_generation";
    j["eval_jobs"] = c.eval_jobs;
    j["surrogate_refit_interval"] = c.surrogate_refit_interval;
    return j.dump(2);
}

} // namespace boga
