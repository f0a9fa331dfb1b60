// Reference external evaluator speaking the boga-eval wire protocol.
// Scores are cheap builtin objectives; the failure-injection flags exist so
// client code can be exercised against out-of-order, missing, malformed and
// non-finite responses.

#include "boga/objectives.hpp"
#include "boga/seqcore.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

using json = nlohmann::json;

namespace {

double score_of(const std::string& landscape, const boga::Sequence& seq) {
    if (landscape == "length") return static_cast<double>(seq.length());
    return boga::evaluate_builtin(seq, boga::builtin_landscape_from_name(landscape));
}

void emit(const std::string& line) {
    std::fputs(line.c_str(), stdout);
    std::fputc('\n', stdout);
    std::fflush(stdout);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mock evaluator for the boga-eval protocol"};
    std::string landscape = "length";
    int latency_ms = 0;
    std::vector<std::uint64_t> drop_ids;
    std::vector<std::uint64_t> malformed_ids;
    std::vector<std::uint64_t> nonfinite_ids;
    int shuffle_window = 1;
    std::string stderr_note;
    app.add_option("--landscape", landscape, "length|sheet|moment|mw (default length)");
    app.add_option("--latency-ms", latency_ms, "Sleep before each response");
    app.add_option("--drop-id", drop_ids, "Never respond to these request ids");
    app.add_option("--malformed-id", malformed_ids,
                   "Respond with a non-numeric score for these ids");
    app.add_option("--nonfinite-id", nonfinite_ids,
                   "Respond with an out-of-range float for these ids");
    app.add_option("--shuffle-window", shuffle_window,
                   "Buffer this many responses and emit them in reverse; must "
                   "not exceed the client's in-flight budget");
    app.add_option("--stderr-note", stderr_note, "Write this line to stderr at startup");
    CLI11_PARSE(app, argc, argv);

    if (!stderr_note.empty()) {
        std::fputs((stderr_note + "\n").c_str(), stderr);
        std::fflush(stderr);
    }

    emit(R"({"protocol": "boga-eval", "version": 1})");

    auto contains = [](const std::vector<std::uint64_t>& v, std::uint64_t id) {
        for (auto x : v)
            if (x == id) return true;
        return false;
    };

    std::vector<std::string> buffer;
    auto flush_buffer = [&] {
        for (auto it = buffer.rbegin(); it != buffer.rend(); ++it) emit(*it);
        buffer.clear();
    };

    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        json req;
        std::uint64_t id = 0;
        std::string sequence;
        try {
            req = json::parse(line);
            id = req.at("id").get<std::uint64_t>();
            sequence = req.at("sequence").get<std::string>();
        } catch (const json::exception& e) {
            std::fprintf(stderr, "bad request line: %s\n", e.what());
            continue;
        }

        if (latency_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms));

        if (contains(drop_ids, id)) {
            std::fprintf(stderr, "dropping id %llu\n", static_cast<unsigned long long>(id));
            continue;
        }

        std::string response;
        if (contains(malformed_ids, id)) {
            response = "{\"id\": " + std::to_string(id) + ", \"score\": \"abc\"}";
        } else if (contains(nonfinite_ids, id)) {
            response = "{\"id\": " + std::to_string(id) + ", \"score\": 1e999}";
        } else {
            double score = 0.0;
            try {
                score = score_of(landscape, boga::parse_sequence(sequence));
            } catch (const std::exception& e) {
                std::fprintf(stderr, "cannot score '%s': %s\n", sequence.c_str(), e.what());
                response = "{\"id\": " + std::to_string(id) + ", \"score\": \"unscorable\"}";
            }
            if (response.empty()) {
                json resp;
                resp["id"] = id;
                resp["score"] = score;
                response = resp.dump();
            }
        }

        buffer.push_back(response);
        if (static_cast<int>(buffer.size()) >= shuffle_window) flush_buffer();
    }
    flush_buffer();
    return 0;
}
