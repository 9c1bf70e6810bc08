#pragma once

#include <cctype>
#include <string>
#include <vector>

namespace arsm {

using TokenList = std::vector<std::string>;

// Lowercase, punctuation-stripped, whitespace-split tokens in input order.
// Alphanumeric runs (plus '_') are tokens; everything else separates.
inline TokenList tokenize(const std::string& text) {
    TokenList tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '_') {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

// Sentence split on '.', '?', '!', ';'. Text with no terminator is one sentence.
inline std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '.' || c == '?' || c == '!' || c == ';') {
            if (cur.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (cur.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(cur);
    return out;
}

inline std::string join(const TokenList& tokens, const std::string& sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += sep;
        out += tokens[i];
    }
    return out;
}

}  // namespace arsm
