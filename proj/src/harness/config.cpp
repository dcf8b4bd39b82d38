#include "incdyn/harness/config.hpp"

#include <fstream>

#include "incdyn/harness/io.hpp"

namespace incdyn {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::kToyFlow: return "toy-flow";
        case ExperimentKind::kToyGd: return "toy-gd";
        case ExperimentKind::kThreshold: return "threshold";
        case ExperimentKind::kSensing: return "sensing";
        case ExperimentKind::kQuadratic: return "quadratic";
        case ExperimentKind::kDiagClassify: return "diag-classify";
        case ExperimentKind::kConvClassify: return "conv-classify";
        case ExperimentKind::kOmpAgreement: return "omp-agreement";
    }
    return "?";
}

const json& ExperimentConfig::params() const { return (*document)["params"]; }

std::string ExperimentConfig::config_hash() const { return fnv1a64_hex(document->dump()); }

namespace {

struct Checker {
    const json& node;
    std::string prefix;
    std::vector<ValidationError>& errors;

    void fail(const std::string& field, const std::string& msg) {
        errors.push_back({prefix + field, msg});
    }
    bool has(const std::string& field) { return node.contains(field); }

    bool require(const std::string& field) {
        if (!has(field)) {
            fail(field, "required field is missing");
            return false;
        }
        return true;
    }

    double number(const std::string& field, double fallback, bool required = false,
                  double min = -1e308, bool strict_min = false) {
        if (!has(field)) {
            if (required) fail(field, "required field is missing");
            return fallback;
        }
        if (!node[field].is_number()) {
            fail(field, "expected a number");
            return fallback;
        }
        double v = node[field].get<double>();
        if (strict_min ? !(v > min) : !(v >= min)) {
            fail(field, "value out of range (minimum " + std::to_string(min) + ")");
            return fallback;
        }
        return v;
    }

    long integer(const std::string& field, long fallback, bool required = false, long min = -(1L << 62)) {
        if (!has(field)) {
            if (required) fail(field, "required field is missing");
            return fallback;
        }
        if (!node[field].is_number_integer()) {
            fail(field, "expected an integer");
            return fallback;
        }
        long v = node[field].get<long>();
        if (v < min) {
            fail(field, "value out of range (minimum " + std::to_string(min) + ")");
            return fallback;
        }
        return v;
    }

    std::string text(const std::string& field, const std::string& fallback, bool required = false) {
        if (!has(field)) {
            if (required) fail(field, "required field is missing");
            return fallback;
        }
        if (!node[field].is_string()) {
            fail(field, "expected a string");
            return fallback;
        }
        return node[field].get<std::string>();
    }

    std::vector<double> number_list(const std::string& field, bool required = false,
                                    bool non_empty = true) {
        std::vector<double> out;
        if (!has(field)) {
            if (required) fail(field, "required field is missing");
            return out;
        }
        if (!node[field].is_array()) {
            fail(field, "expected an array of numbers");
            return out;
        }
        for (const auto& e : node[field]) {
            if (!e.is_number()) {
                fail(field, "expected numeric entries");
                return {};
            }
            out.push_back(e.get<double>());
        }
        if (non_empty && out.empty()) fail(field, "grid must be non-empty");
        return out;
    }

    std::vector<long> integer_list(const std::string& field, bool required = false,
                                   bool non_empty = true) {
        std::vector<long> out;
        if (!has(field)) {
            if (required) fail(field, "required field is missing");
            return out;
        }
        if (!node[field].is_array()) {
            fail(field, "expected an array of integers");
            return out;
        }
        for (const auto& e : node[field]) {
            if (!e.is_number_integer()) {
                fail(field, "expected integer entries");
                return {};
            }
            out.push_back(e.get<long>());
        }
        if (non_empty && out.empty()) fail(field, "grid must be non-empty");
        return out;
    }
};

void validate_params(ExperimentKind kind, const json& params, std::vector<ValidationError>& errors) {
    Checker p{params, "params.", errors};
    switch (kind) {
        case ExperimentKind::kToyFlow: {
            auto depths = p.integer_list("depths", true);
            for (long n : depths)
                if (n < 0) p.fail("depths", "depths must be >= 1 (0 encodes the infinite law)");
            auto scales = p.number_list("init_scales", true);
            for (double s : scales)
                if (!(s > 0)) p.fail("init_scales", "initialization scales must be positive");
            auto opt = p.number_list("optimal", true);
            for (double v : opt)
                if (v < 0) p.fail("optimal", "optimal values must be >= 0");
            p.number("t_end", 0.0, false, 0.0, true);
            p.integer("samples", 201, false, 2);
            p.number("rtol", 1e-9, false, 0.0, true);
            p.number_list("alpha_marks", false, false);
            break;
        }
        case ExperimentKind::kToyGd: {
            long depth = p.integer("depth", 0, true, 1);
            (void)depth;
            p.number("init_scale", 0.0, true, 0.0, true);
            auto opt = p.number_list("optimal", true);
            for (double v : opt)
                if (v < 0) p.fail("optimal", "optimal values must be >= 0");
            if (!p.has("c") && !p.has("learning_rate"))
                p.fail("c", "either c or learning_rate is required");
            p.number("c", 0.0, false, 0.0, true);
            p.number("learning_rate", 0.0, false, 0.0, true);
            p.integer("steps", 0, true, 1);
            p.integer("log_every", 1, false, 1);
            if (p.has("depth_ratio_probe") && !params["depth_ratio_probe"].is_boolean())
                p.fail("depth_ratio_probe", "expected a boolean");
            break;
        }
        case ExperimentKind::kThreshold: {
            std::string method = p.text("method", "flow");
            if (method != "flow" && method != "gd") p.fail("method", "expected \"flow\" or \"gd\"");
            auto depths = p.integer_list("depths", true);
            for (long n : depths) {
                if (method == "gd" && n != 2) p.fail("depths", "gd thresholds exist for depth 2 only");
                if (n < 2) p.fail("depths", "threshold bounds require depth >= 2");
            }
            auto ratios = p.number_list("ratios", true);
            for (double r : ratios)
                if (!(r > 1)) p.fail("ratios", "ratios must exceed 1");
            auto ss = p.number_list("s_values", true);
            for (double s : ss)
                if (!(s > 0 && s < 0.25)) p.fail("s_values", "s must lie in (0, 1/4)");
            auto fs = p.number_list("f_values", true);
            for (double f : fs)
                if (!(f > 0.75 && f < 1)) p.fail("f_values", "f must lie in (3/4, 1)");
            p.number("sigma_star_small", 1.0, false, 0.0, true);
            if (method == "gd") p.number("c", 0.0, true, 0.0, true);
            p.number("bisect_rel_width", 1e-3, false, 0.0, true);
            break;
        }
        case ExperimentKind::kSensing: {
            p.integer("dim", 0, true, 1);
            p.integer("rank", 0, true, 1);
            auto depths = p.integer_list("depths", true);
            for (long n : depths)
                if (n < 1) p.fail("depths", "depths must be >= 1");
            p.integer("num_measurements", 0, false, 0);
            std::string init = p.text("init", "gaussian");
            if (init != "gaussian" && init != "identity")
                p.fail("init", "expected \"gaussian\" or \"identity\"");
            p.number("init_scale", 1e-4, false, 0.0, true);
            p.number("eta", 0.0, false, 0.0);
            p.integer("steps", 20000, false, 1);
            p.integer("log_every", 100, false, 1);
            p.integer("num_seeds", 1, false, 1);
            p.number("top_eigenvalue", 3.0, false, 0.0, true);
            break;
        }
        case ExperimentKind::kQuadratic: {
            p.integer("dim", 0, true, 1);
            p.integer("rank", 0, true, 1);
            p.integer("dataset_size", 0, true, 2);
            std::string loss = p.text("loss", "squared");
            if (loss != "squared" && loss != "squared-with-bias" && loss != "variance")
                p.fail("loss", "expected \"squared\", \"squared-with-bias\" or \"variance\"");
            p.number("init_scale", 1e-4, false, 0.0, true);
            p.number("eta", 0.0, false, 0.0);
            p.integer("steps", 40000, false, 1);
            p.integer("log_every", 100, false, 1);
            p.integer("num_seeds", 1, false, 1);
            break;
        }
        case ExperimentKind::kDiagClassify:
        case ExperimentKind::kConvClassify: {
            p.integer("dim", 0, true, 2);
            p.integer("num_examples", 0, true, 2);
            if (kind == ExperimentKind::kDiagClassify)
                p.integer("sparsity", 0, true, 1);
            else
                p.integer("frequency_pairs", 0, true, 1);
            auto depths = p.integer_list("depths", true);
            for (long n : depths)
                if (n < 1) p.fail("depths", "depths must be >= 1");
            auto scales = p.number_list("init_scales", true);
            for (double s : scales)
                if (!(s > 0)) p.fail("init_scales", "initialization scales must be positive");
            std::string loss = p.text("loss", "exponential");
            if (loss != "exponential" && loss != "logistic")
                p.fail("loss", "expected \"exponential\" or \"logistic\"");
            std::string schedule = p.text("schedule", "loss-scaled");
            if (schedule != "fixed" && schedule != "loss-scaled")
                p.fail("schedule", "expected \"fixed\" or \"loss-scaled\"");
            p.number("eta", 0.0, false, 0.0);
            p.integer("max_steps", 100000, false, 1);
            p.integer("log_every", 200, false, 1);
            p.integer("num_seeds", 1, false, 1);
            p.integer("top_k", 5, false, 1);
            break;
        }
        case ExperimentKind::kOmpAgreement: {
            p.integer("dim", 0, true, 1);
            p.integer("num_atoms", 0, true, 1);
            p.integer("depth", 5, false, 1);
            p.number("init_scale", 1e-4, false, 0.0, true);
            p.number("eta", 3e-3, false, 0.0, true);
            auto sp = p.integer_list("sparsities", true);
            for (long s : sp)
                if (s < 1) p.fail("sparsities", "sparsity levels must be >= 1");
            p.integer("trials", 0, true, 2);
            p.number("threshold_frac", 0.01, false, 0.0, true);
            p.integer("max_steps", 200000, false, 1);
            break;
        }
    }
}

}  // namespace

std::optional<ExperimentConfig> parse_config(const std::string& json_text,
                                             std::vector<ValidationError>& errors) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) {
        errors.push_back({"<document>", "not valid JSON"});
        return std::nullopt;
    }
    if (!doc.is_object()) {
        errors.push_back({"<document>", "top level must be an object"});
        return std::nullopt;
    }
    Checker top{doc, "", errors};
    ExperimentConfig cfg;
    cfg.schema_version = static_cast<int>(top.integer("schema_version", 1, true, 1));
    if (cfg.schema_version != 1)
        errors.push_back({"schema_version", "unsupported schema version"});
    std::string kind = top.text("kind", "", true);
    bool kind_ok = true;
    if (kind == "toy-flow") cfg.kind = ExperimentKind::kToyFlow;
    else if (kind == "toy-gd") cfg.kind = ExperimentKind::kToyGd;
    else if (kind == "threshold") cfg.kind = ExperimentKind::kThreshold;
    else if (kind == "sensing") cfg.kind = ExperimentKind::kSensing;
    else if (kind == "quadratic") cfg.kind = ExperimentKind::kQuadratic;
    else if (kind == "diag-classify") cfg.kind = ExperimentKind::kDiagClassify;
    else if (kind == "conv-classify") cfg.kind = ExperimentKind::kConvClassify;
    else if (kind == "omp-agreement") cfg.kind = ExperimentKind::kOmpAgreement;
    else {
        errors.push_back({"kind", "unknown experiment kind \"" + kind + "\""});
        kind_ok = false;
    }
    cfg.name = top.text("name", "", true);
    if (cfg.name.empty() && top.has("name")) errors.push_back({"name", "must not be empty"});
    if (!doc.contains("seed"))
        errors.push_back({"seed", "required field is missing"});
    else if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
        errors.push_back({"seed", "expected a 64-bit integer"});
    else
        cfg.seed = doc["seed"].get<std::uint64_t>();
    cfg.output_dir = top.text("output_dir", "");

    if (!doc.contains("params") || !doc["params"].is_object())
        errors.push_back({"params", "required object is missing"});
    else if (kind_ok)
        validate_params(cfg.kind, doc["params"], errors);

    if (!errors.empty()) return std::nullopt;
    cfg.document = std::make_shared<json>(std::move(doc));
    return cfg;
}

std::optional<ExperimentConfig> load_config(const std::string& path,
                                            std::vector<ValidationError>& errors) {
    std::ifstream in(path);
    if (!in) {
        errors.push_back({"<file>", "cannot open " + path});
        return std::nullopt;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, errors);
}

}  // namespace incdyn
