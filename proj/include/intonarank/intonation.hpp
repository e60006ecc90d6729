#pragma once

#include <stdexcept>
#include <string>

namespace intonarank {

enum class Intonation { statement, question, unlabeled };

inline const char* to_string(Intonation v) {
    switch (v) {
        case Intonation::statement: return "statement";
        case Intonation::question: return "question";
        default: return "unlabeled";
    }
}

inline Intonation intonation_from_string(const std::string& s) {
    if (s == "statement") return Intonation::statement;
    if (s == "question") return Intonation::question;
    if (s == "unlabeled") return Intonation::unlabeled;
    throw std::invalid_argument("unknown intonation label: " + s);
}

}  // namespace intonarank
