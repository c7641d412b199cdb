#pragma once

#include <map>
#include <string>

namespace idea23d {

// Agent prompt templates are data. Each declares slots as {name}; loading
// validates that every required slot is present.
struct PromptTemplates {
    std::string gen;       // slots: idea_text, feedback, memory_digest, n
    std::string select;    // slots: idea_text, n
    std::string feedback;  // slots: idea_text, memory_digest

    static PromptTemplates builtin();
    // Reads gen.txt, select.txt and feedback.txt from a directory.
    static PromptTemplates load_dir(const std::string& dir);

    // Throws ConfigError when a declared slot is missing.
    void validate() const;
};

std::string instantiate_template(const std::string& tmpl,
                                 const std::map<std::string, std::string>& slots);

}  // namespace idea23d
