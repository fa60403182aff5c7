#pragma once
// Pipeline configuration: a TOML-subset file (sections, scalar and flat-array
// values, # comments) validated into a typed PipelineConfig. Unknown sections
// or keys are rejected so typos fail loudly. Secrets never appear here; the
// remote generator reads PEIRCE_API_KEY from the environment.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "peirce/critique.hpp"
#include "peirce/gen.hpp"
#include "peirce/refine.hpp"

namespace peirce::config {

// Raw parse: {section: {key: value}}. Values are strings, booleans, numbers,
// or homogeneous arrays of strings / numbers.
nlohmann::json parse_toml(const std::string& text, const std::string& origin = "config");

struct PipelineConfig {
    // [kb]
    std::string kb_path;

    // [retrieval]
    std::vector<std::string> retrieval_models = {"bm25"};  // bm25 | unification
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    std::vector<double> ensemble_weights;  // empty = no ensemble
    std::string training_path;             // problems file feeding unification

    // [generator]
    std::string generator_kind = "replay";  // replay | remote
    std::string script_path;                // replay
    std::string endpoint;                   // remote
    std::string model_name;                 // remote
    int retry_limit = 3;

    // [prover]
    int depth = 50;

    // [critique]
    std::vector<std::string> critiques = {"hard", "parsimony", "coherence",
                                          "uncertainty"};
    std::string entailment_endpoint;  // empty = lexical baseline
    std::string hedging_endpoint;     // empty = hedge lexicon

    // [refine]
    int max_iterations = 10;
    bool stop_on_valid = true;
    int retrieval_top_k = 0;

    // [output]
    std::string out_dir = "out";
};

// Parse + validate. Relative paths inside the file resolve against the config
// file's directory; referenced files must exist.
PipelineConfig load_config(const std::string& path);

// Validation shared with load_config; `base_dir` anchors relative paths.
PipelineConfig from_toml(const nlohmann::json& toml, const std::string& base_dir,
                         const std::string& origin = "config");

// Wiring helpers used by the CLI.
std::unique_ptr<gen::GenerativeModel> make_generator(const PipelineConfig& config,
                                                     std::optional<int> seed = {});
refine::RefinementConfig make_refinement_config(const PipelineConfig& config);

}  // namespace peirce::config
