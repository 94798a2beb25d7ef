#include "ghzqkd/transcript.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace ghzqkd::protocol {

namespace {

char basis_letter(Basis b) { return qcore::basis_char(b); }

Basis parse_basis(char c) {
    switch (c) {
        case 'X': return Basis::X;
        case 'Y': return Basis::Y;
        case 'Z': return Basis::Z;
        default: throw std::invalid_argument("bad basis letter in transcript");
    }
}

char outcome_letter(Outcome o) { return qcore::outcome_char(o); }

Outcome parse_outcome(char c) {
    if (c == '+') return Outcome::Plus;
    if (c == '-') return Outcome::Minus;
    throw std::invalid_argument("bad outcome letter in transcript");
}

std::string join_u32(const std::vector<std::uint32_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::vector<std::uint32_t> split_u32(const std::string& text) {
    std::vector<std::uint32_t> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        std::uint32_t v = 0;
        const auto res = std::from_chars(text.data() + pos, text.data() + end, v);
        if (res.ec != std::errc{}) throw std::invalid_argument("bad integer list in transcript");
        out.push_back(v);
        pos = end + 1;
    }
    return out;
}

std::string bits_string(const postproc::BitVec& bits) {
    std::string out;
    out.reserve(bits.size());
    for (auto b : bits) out += b ? '1' : '0';
    return out;
}

postproc::BitVec parse_bits(const std::string& text) {
    postproc::BitVec out;
    out.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') throw std::invalid_argument("bad bit string in transcript");
        out.push_back(c == '1' ? 1 : 0);
    }
    return out;
}

const char* scope_name(postproc::ParityScope s) {
    switch (s) {
        case postproc::ParityScope::Block: return "block";
        case postproc::ParityScope::Bisect: return "bisect";
        case postproc::ParityScope::Subset: return "subset";
    }
    return "?";
}

postproc::ParityScope parse_scope(const std::string& s) {
    if (s == "block") return postproc::ParityScope::Block;
    if (s == "bisect") return postproc::ParityScope::Bisect;
    if (s == "subset") return postproc::ParityScope::Subset;
    throw std::invalid_argument("bad parity scope in transcript");
}

// Tokenizer for "tag k=v k=v" payloads.
class FieldMap {
public:
    explicit FieldMap(std::istringstream& in) {
        std::string token;
        while (in >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("malformed transcript field: " + token);
            fields_.emplace_back(token.substr(0, eq), token.substr(eq + 1));
        }
    }

    const std::string& get(const std::string& key) const {
        for (const auto& [k, v] : fields_)
            if (k == key) return v;
        throw std::invalid_argument("missing transcript field: " + key);
    }

    std::uint64_t get_u64(const std::string& key) const {
        const std::string& v = get(key);
        std::uint64_t out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{}) throw std::invalid_argument("bad integer field: " + key);
        return out;
    }

    std::uint32_t get_u32(const std::string& key) const {
        return static_cast<std::uint32_t>(get_u64(key));
    }

private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

}  // namespace

std::string message_line(const Message& message) {
    std::string line = message.from == Party::Alice ? "A " : "B ";
    const auto& body = message.body;
    if (const auto* m = std::get_if<LossReport>(&body)) {
        line += "loss n=" + std::to_string(m->rounds.size()) + " rounds=" + join_u32(m->rounds);
    } else if (const auto* m = std::get_if<BasisAnnounce>(&body)) {
        line += "basis round=" + std::to_string(m->round) + " b=";
        line += basis_letter(m->basis);
    } else if (const auto* m = std::get_if<TestReveal>(&body)) {
        line += "reveal round=" + std::to_string(m->round) + " b=";
        line += basis_letter(m->basis);
        line += " o=";
        line += outcome_letter(m->outcome);
    } else if (const auto* m = std::get_if<TestVerdict>(&body)) {
        line += "verdict accept=" + std::to_string(m->accept ? 1 : 0) +
                " violations=" + std::to_string(m->violations) +
                " tested=" + std::to_string(m->tested);
    } else if (const auto* m = std::get_if<QberSample>(&body)) {
        line += "qber_sample n=" + std::to_string(m->positions.size()) +
                " pos=" + join_u32(m->positions) + " bits=" + bits_string(m->bits);
    } else if (const auto* m = std::get_if<QberReply>(&body)) {
        line += "qber_bits bits=" + bits_string(m->bits);
    } else if (const auto* m = std::get_if<ReconBegin>(&body)) {
        line += "recon_begin seed=" + std::to_string(m->shuffle_seed) +
                " passes=" + std::to_string(m->n_passes) +
                " block=" + std::to_string(m->initial_block);
    } else if (const auto* m = std::get_if<ReconParityMsg>(&body)) {
        const auto& e = m->exchange;
        line += "recon scope=";
        line += scope_name(e.scope);
        line += " phase=" + std::to_string(e.phase) + " lo=" + std::to_string(e.lo) +
                " hi=" + std::to_string(e.hi) + " p=" + std::to_string(e.parity ? 1 : 0) +
                " mismatch=" + std::to_string(e.mismatch ? 1 : 0);
    } else if (const auto* m = std::get_if<HashCompareMsg>(&body)) {
        line += "hash h=" + std::to_string(m->hash) +
                " match=" + std::to_string(m->match ? 1 : 0);
    } else if (const auto* m = std::get_if<PaSpecMsg>(&body)) {
        line += "pa seed=" + std::to_string(m->seed) + " in_len=" + std::to_string(m->input_len) +
                " qber_num=" + std::to_string(m->qber_mismatches) +
                " qber_den=" + std::to_string(m->qber_sampled) +
                " leaked=" + std::to_string(m->leaked_bits) +
                " margin=" + std::to_string(m->safety_margin) +
                " out_len=" + std::to_string(m->out_len);
    } else {
        throw std::logic_error("unhandled message type");
    }
    return line;
}

Message parse_message_line(const std::string& line) {
    std::istringstream in(line);
    std::string party, tag;
    if (!(in >> party >> tag)) throw std::invalid_argument("malformed transcript line: " + line);
    Message msg;
    if (party == "A")
        msg.from = Party::Alice;
    else if (party == "B")
        msg.from = Party::Bob;
    else
        throw std::invalid_argument("bad party in transcript line: " + line);

    const FieldMap fields(in);
    if (tag == "loss") {
        LossReport m;
        const std::string& rounds = fields.get("rounds");
        if (!rounds.empty()) m.rounds = split_u32(rounds);
        if (m.rounds.size() != fields.get_u64("n"))
            throw std::invalid_argument("loss report count mismatch");
        msg.body = std::move(m);
    } else if (tag == "basis") {
        msg.body = BasisAnnounce{fields.get_u32("round"), parse_basis(fields.get("b").at(0))};
    } else if (tag == "reveal") {
        msg.body = TestReveal{fields.get_u32("round"), parse_basis(fields.get("b").at(0)),
                              parse_outcome(fields.get("o").at(0))};
    } else if (tag == "verdict") {
        msg.body = TestVerdict{fields.get_u64("accept") != 0, fields.get_u32("violations"),
                               fields.get_u32("tested")};
    } else if (tag == "qber_sample") {
        QberSample m;
        const std::string& pos = fields.get("pos");
        if (!pos.empty()) m.positions = split_u32(pos);
        m.bits = parse_bits(fields.get("bits"));
        if (m.positions.size() != fields.get_u64("n") || m.bits.size() != m.positions.size())
            throw std::invalid_argument("qber sample count mismatch");
        msg.body = std::move(m);
    } else if (tag == "qber_bits") {
        msg.body = QberReply{parse_bits(fields.get("bits"))};
    } else if (tag == "recon_begin") {
        msg.body = ReconBegin{fields.get_u64("seed"), fields.get_u32("passes"),
                              fields.get_u32("block")};
    } else if (tag == "recon") {
        postproc::ParityExchange e;
        e.scope = parse_scope(fields.get("scope"));
        e.phase = fields.get_u32("phase");
        e.lo = fields.get_u32("lo");
        e.hi = fields.get_u32("hi");
        e.parity = static_cast<std::uint8_t>(fields.get_u64("p"));
        e.mismatch = static_cast<std::uint8_t>(fields.get_u64("mismatch"));
        msg.body = ReconParityMsg{e};
    } else if (tag == "hash") {
        msg.body = HashCompareMsg{fields.get_u64("h"), fields.get_u64("match") != 0};
    } else if (tag == "pa") {
        msg.body = PaSpecMsg{fields.get_u64("seed"),   fields.get_u32("in_len"),
                             fields.get_u32("qber_num"), fields.get_u32("qber_den"),
                             fields.get_u64("leaked"), fields.get_u32("margin"),
                             fields.get_u32("out_len")};
    } else {
        throw std::invalid_argument("unknown transcript tag: " + tag);
    }
    return msg;
}

std::string serialize_session_messages(const Transcript& transcript) {
    std::string out;
    for (const auto& m : transcript.messages) {
        out += message_line(m);
        out += '\n';
    }
    return out;
}

}  // namespace ghzqkd::protocol
