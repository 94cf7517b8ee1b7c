#include "weakbench/templates.hpp"

#include <filesystem>

#include <yaml-cpp/yaml.h>

#include "weakbench/answer.hpp"
#include "weakbench/error.hpp"

namespace weakbench::hypogen {

namespace {

std::set<std::string> scan_placeholders(std::string_view text) {
    std::set<std::string> names;
    size_t pos = 0;
    while ((pos = text.find("${", pos)) != std::string_view::npos) {
        size_t close = text.find('}', pos + 2);
        if (close == std::string_view::npos) break;
        names.insert(std::string(text.substr(pos + 2, close - pos - 2)));
        pos = close + 1;
    }
    return names;
}

std::string describe(const std::set<std::string>& names) {
    std::string out = "{";
    for (const auto& n : names) {
        if (out.size() > 1) out += ", ";
        out += n;
    }
    return out + "}";
}

void require_placeholders(const char* section, const PromptTemplate& tmpl,
                          const std::set<std::string>& expected) {
    const auto actual = tmpl.placeholders();
    for (const auto& name : actual) {
        if (!expected.count(name))
            throw ParseError(std::string("template ") + section + ": unknown placeholder ${" +
                             name + "}");
    }
    for (const auto& name : expected) {
        if (!actual.count(name))
            throw ParseError(std::string("template ") + section + ": missing placeholder ${" +
                             name + "}; has " + describe(actual));
    }
}

std::string yaml_string(const YAML::Node& node, const char* section) {
    if (!node || !node.IsScalar())
        throw ParseError(std::string("template asset: missing section ") + section);
    return node.as<std::string>();
}

}  // namespace

std::set<std::string> PromptTemplate::placeholders() const { return scan_placeholders(text); }

void PromptTemplateSet::validate() const {
    require_placeholders("observations", observations, {"problems", "answers", "label"});
    require_placeholders("batched_generation.system", batched_generation_system,
                         {"num_hypotheses"});
    require_placeholders("batched_generation.user", batched_generation_user,
                         {"observations", "num_hypotheses"});
    require_placeholders("inference.system", inference_system, {});
    require_placeholders("inference.user", inference_user,
                         {"hypothesis", "problems", "answers"});
    require_placeholders("multiple_hypotheses_inference.system", multi_inference_system, {});
    require_placeholders("multiple_hypotheses_inference.user", multi_inference_user,
                         {"hypotheses", "problems", "answers"});
}

PromptTemplateSet load_template_set(const std::string& path) {
    PromptTemplateSet set;
    set.granularity = granularity_from_string(std::filesystem::path(path).stem().string());

    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::Exception& e) {
        throw ParseError("template asset " + path + ": " + e.what());
    }
    YAML::Node templates = root["prompt_templates"];
    if (!templates) throw ParseError("template asset " + path + ": missing prompt_templates");

    set.observations.text = yaml_string(templates["observations"], "observations");
    YAML::Node bg = templates["batched_generation"];
    if (!bg) throw ParseError("template asset " + path + ": missing section batched_generation");
    set.batched_generation_system.text = yaml_string(bg["system"], "batched_generation.system");
    set.batched_generation_user.text = yaml_string(bg["user"], "batched_generation.user");
    YAML::Node inf = templates["inference"];
    if (!inf) throw ParseError("template asset " + path + ": missing section inference");
    set.inference_system.text = yaml_string(inf["system"], "inference.system");
    set.inference_user.text = yaml_string(inf["user"], "inference.user");
    YAML::Node multi = templates["multiple_hypotheses_inference"];
    if (!multi)
        throw ParseError("template asset " + path +
                         ": missing section multiple_hypotheses_inference");
    set.multi_inference_system.text = yaml_string(multi["system"],
                                                  "multiple_hypotheses_inference.system");
    set.multi_inference_user.text = yaml_string(multi["user"],
                                                "multiple_hypotheses_inference.user");

    set.validate();
    return set;
}

std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings) {
    const auto names = tmpl.placeholders();
    for (const auto& [name, _] : bindings) {
        if (!names.count(name)) throw ParseError("render: extra binding for ${" + name + "}");
    }
    for (const auto& name : names) {
        if (!bindings.count(name)) throw ParseError("render: missing binding for ${" + name + "}");
    }

    std::string out;
    out.reserve(tmpl.text.size());
    size_t pos = 0;
    const std::string& text = tmpl.text;
    while (pos < text.size()) {
        size_t open = text.find("${", pos);
        if (open == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        size_t close = text.find('}', open + 2);
        if (close == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        out.append(text, pos, open - pos);
        out += bindings.at(text.substr(open + 2, close - open - 2));
        pos = close + 1;
    }
    return out;
}

std::string render_observations(const PromptTemplate& observations_template,
                                const std::vector<LabeledObservation>& observations) {
    std::string out;
    for (size_t i = 0; i < observations.size(); ++i) {
        const auto& obs = observations[i];
        obs.validate();
        if (i > 0) out += "\n";
        out += render_template(observations_template,
                               {{"problems", obs.problem_text},
                                {"answers", obs.answer_text},
                                {"label", std::string(answer::to_string(obs.label))}});
    }
    return out;
}

}  // namespace weakbench::hypogen
