#include "plap/cli/json_locator.hpp"

#include <algorithm>

namespace plap::cli {

std::size_t line_at(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

namespace {

std::string escape_pointer_token(std::string_view key)
{
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

class Scanner {
public:
    explicit Scanner(std::string_view text) : text_(text) {}

    std::map<std::string, std::size_t> run()
    {
        value("");
        return std::move(lines_);
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '\n')
                ++line_;
            else if (c != ' ' && c != '\t' && c != '\r')
                return;
            ++pos_;
        }
    }

    bool at(char c) const { return pos_ < text_.size() && text_[pos_] == c; }

    // Raw key text; escapes other than \" and \\ are kept verbatim.
    std::string string_literal()
    {
        std::string out;
        ++pos_;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
                const char next = text_[pos_ + 1];
                if (next == '"' || next == '\\' || next == '/') {
                    out += next;
                    pos_ += 2;
                    continue;
                }
                out += text_[pos_++];
            }
            out += text_[pos_++];
        }
        ++pos_;
        return out;
    }

    void value(const std::string& pointer)
    {
        skip_ws();
        lines_[pointer] = line_;
        if (pos_ >= text_.size())
            return;
        const char c = text_[pos_];
        if (c == '{') {
            ++pos_;
            skip_ws();
            while (pos_ < text_.size() && !at('}')) {
                if (!at('"'))
                    return;
                const std::string key = string_literal();
                skip_ws();
                if (at(':'))
                    ++pos_;
                value(pointer + "/" + escape_pointer_token(key));
                skip_ws();
                if (at(','))
                    ++pos_;
                skip_ws();
            }
            ++pos_;
        } else if (c == '[') {
            ++pos_;
            skip_ws();
            for (std::size_t i = 0; pos_ < text_.size() && !at(']'); ++i) {
                value(pointer + "/" + std::to_string(i));
                skip_ws();
                if (at(','))
                    ++pos_;
                skip_ws();
            }
            ++pos_;
        } else if (c == '"') {
            string_literal();
        } else {
            while (pos_ < text_.size()) {
                const char d = text_[pos_];
                if (d == ',' || d == '}' || d == ']' || d == ' ' || d == '\t' || d == '\r' || d == '\n')
                    break;
                ++pos_;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::map<std::string, std::size_t> lines_;
};

} // namespace

std::map<std::string, std::size_t> locate_values(std::string_view text)
{
    return Scanner(text).run();
}

} // namespace plap::cli
