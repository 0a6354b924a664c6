#include "alphaforge/prune.hpp"

#include <sodium.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <stdexcept>

namespace alphaforge {

namespace {

class Bits {
 public:
  explicit Bits(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void assign_single(std::size_t i) {
    std::fill(words_.begin(), words_.end(), 0);
    set(i);
  }
  void merge(const Bits& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
  }
  template <class F>
  void for_each(F f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t x = words_[w];
      while (x != 0) {
        f(w * 64 + static_cast<std::size_t>(std::countr_zero(x)));
        x &= x - 1;
      }
    }
  }
  friend bool operator==(const Bits&, const Bits&) = default;

 private:
  std::vector<std::uint64_t> words_;
};

int register_key(Register r) { return static_cast<int>(r.bank) * 256 + r.index; }

struct Layout {
  // Dense storage locations: registers that appear in the program plus one
  // history slot per ts_rank instruction.
  std::map<int, int> reg_loc;
  std::map<InstructionId, int> history_loc;
  int n_locs = 0;

  int loc(Register r) {
    auto [it, inserted] = reg_loc.try_emplace(register_key(r), n_locs);
    if (inserted) ++n_locs;
    return it->second;
  }
};

constexpr std::array<Block, 4> kBlocks{Block::Setup, Block::PredictTrain, Block::Update,
                                       Block::PredictInfer};

Component block_component(Block b) {
  switch (b) {
    case Block::Setup: return Component::Setup;
    case Block::Update: return Component::Update;
    default: return Component::Predict;
  }
}

}  // namespace

DependencyGraph build_dependency_graph(const AlphaProgram& p) {
  DependencyGraph g;
  g.nodes.push_back({NodeKind::Zero, Block::Setup, {}});
  g.nodes.push_back({NodeKind::EnvFeatures, Block::Setup, {}});
  g.nodes.push_back({NodeKind::EnvLabel, Block::Setup, {}});

  Layout layout;
  const int m0 = layout.loc(kFeatureRegister);
  const int s0 = layout.loc(kLabelRegister);
  const int s1 = layout.loc(kPredictionRegister);

  struct Op {
    int node;
    std::vector<int> reads;
    std::vector<int> writes;
  };
  std::array<std::vector<Op>, 4> block_ops;
  for (Block b : kBlocks) {
    const Component c = block_component(b);
    const auto& code = p.component(c);
    for (std::size_t i = 0; i < code.size(); ++i) {
      const Instruction& ins = code[i];
      const InstructionId id{c, static_cast<int>(i)};
      Op op;
      op.node = static_cast<int>(g.nodes.size());
      g.nodes.push_back({NodeKind::Instruction, b, id});
      const OpInfo& info = ins.info();
      for (int k = 0; k < info.n_in; ++k) op.reads.push_back(layout.loc(ins.in[k]));
      op.writes.push_back(layout.loc(ins.out));
      if (ins.op == Opcode::TsRank) {
        auto [it, inserted] = layout.history_loc.try_emplace(id, layout.n_locs);
        if (inserted) ++layout.n_locs;
        op.reads.push_back(it->second);
        op.writes.push_back(it->second);
      }
      block_ops[static_cast<int>(b)].push_back(std::move(op));
    }
  }

  const std::size_t n_nodes = g.nodes.size();
  const std::size_t n_locs = static_cast<std::size_t>(layout.n_locs);
  using State = std::vector<Bits>;
  std::array<State, 4> out_state;
  for (auto& s : out_state) s.assign(n_locs, Bits(n_nodes));
  std::vector<Bits> node_inputs(n_nodes, Bits(n_nodes));

  State entry(n_locs, Bits(n_nodes));
  for (auto& bits : entry) bits.set(DependencyGraph::kZero);

  auto preds = [](Block b) -> std::vector<Block> {
    switch (b) {
      case Block::Setup: return {};
      case Block::PredictTrain: return {Block::Setup, Block::Update};
      case Block::Update: return {Block::PredictTrain};
      case Block::PredictInfer: return {Block::Setup, Block::Update, Block::PredictInfer};
    }
    return {};
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (Block b : kBlocks) {
      State state = b == Block::Setup ? entry : State(n_locs, Bits(n_nodes));
      for (Block pb : preds(b)) {
        for (std::size_t l = 0; l < n_locs; ++l) state[l].merge(out_state[static_cast<int>(pb)][l]);
      }
      if (b == Block::PredictTrain || b == Block::PredictInfer) {
        state[m0].assign_single(DependencyGraph::kEnvFeatures);
      }
      if (b == Block::PredictTrain) state[s0].assign_single(DependencyGraph::kEnvLabel);
      for (const Op& op : block_ops[static_cast<int>(b)]) {
        for (int r : op.reads) node_inputs[op.node].merge(state[r]);
        for (int w : op.writes) state[w].assign_single(op.node);
      }
      if (state != out_state[static_cast<int>(b)]) {
        out_state[static_cast<int>(b)] = std::move(state);
        changed = true;
      }
    }
  }

  g.inputs.resize(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    node_inputs[n].for_each([&](std::size_t d) { g.inputs[n].push_back(static_cast<int>(d)); });
  }
  Bits roots(n_nodes);
  roots.merge(out_state[static_cast<int>(Block::PredictTrain)][s1]);
  roots.merge(out_state[static_cast<int>(Block::PredictInfer)][s1]);
  roots.for_each([&](std::size_t d) { g.roots.push_back(static_cast<int>(d)); });
  return g;
}

std::vector<InstructionId> live_instructions(const AlphaProgram& p) {
  const DependencyGraph g = build_dependency_graph(p);
  std::vector<char> seen(g.nodes.size(), 0);
  std::vector<int> stack(g.roots.begin(), g.roots.end());
  for (int r : g.roots) seen[r] = 1;
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    for (int d : g.inputs[n]) {
      if (!seen[d]) {
        seen[d] = 1;
        stack.push_back(d);
      }
    }
  }
  std::vector<InstructionId> live;
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    if (seen[n] && g.nodes[n].kind == NodeKind::Instruction) live.push_back(g.nodes[n].id);
  }
  std::sort(live.begin(), live.end());
  live.erase(std::unique(live.begin(), live.end()), live.end());
  return live;
}

PruneResult prune_redundant_ops(const AlphaProgram& p) {
  const std::vector<InstructionId> live = live_instructions(p);
  PruneResult result;
  for (Component c : kComponents) {
    const auto& code = p.component(c);
    for (std::size_t i = 0; i < code.size(); ++i) {
      const InstructionId id{c, static_cast<int>(i)};
      if (std::binary_search(live.begin(), live.end(), id)) {
        result.pruned.component(c).push_back(code[i]);
      } else {
        result.removed.push_back(id);
      }
    }
  }
  return result;
}

bool is_redundant_alpha(const AlphaProgram& p) {
  const DependencyGraph g = build_dependency_graph(p);
  std::vector<std::vector<int>> consumers(g.nodes.size());
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    for (int d : g.inputs[n]) consumers[d].push_back(static_cast<int>(n));
  }
  std::vector<char> tainted(g.nodes.size(), 0);
  std::vector<int> stack{DependencyGraph::kEnvFeatures};
  tainted[DependencyGraph::kEnvFeatures] = 1;
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    for (int c : consumers[n]) {
      if (!tainted[c]) {
        tainted[c] = 1;
        stack.push_back(c);
      }
    }
  }
  return std::none_of(g.roots.begin(), g.roots.end(), [&](int r) { return tainted[r] != 0; });
}

// ---------------------------------------------------------------------------

std::string Fingerprint::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  for (std::uint8_t b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xF]);
  }
  return s;
}

Fingerprint Fingerprint::from_hex(const std::string& text) {
  if (text.size() != 32) throw std::invalid_argument("fingerprint hex must be 32 characters");
  auto nibble = [&](char ch) -> int {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    throw std::invalid_argument("bad hex digit in fingerprint");
  };
  Fingerprint f;
  for (std::size_t i = 0; i < 16; ++i) {
    f.bytes[i] = static_cast<std::uint8_t>(nibble(text[2 * i]) * 16 + nibble(text[2 * i + 1]));
  }
  return f;
}

std::size_t FingerprintHash::operator()(const Fingerprint& f) const noexcept {
  std::uint64_t h;
  std::memcpy(&h, f.bytes.data(), sizeof h);
  return static_cast<std::size_t>(h);
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_register(std::vector<std::uint8_t>& out, Register r) {
  out.push_back(static_cast<std::uint8_t>(r.bank));
  out.push_back(r.index);
}

}  // namespace

std::vector<std::uint8_t> canonical_bytes(const AlphaProgram& p) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + p.size() * 24);
  for (Component c : kComponents) {
    const auto& code = p.component(c);
    put_u16(out, static_cast<std::uint16_t>(code.size()));
    for (const Instruction& ins : code) {
      put_u16(out, static_cast<std::uint16_t>(ins.op));
      put_register(out, ins.out);
      put_register(out, ins.in[0]);
      put_register(out, ins.in[1]);
      put_u64(out, std::bit_cast<std::uint64_t>(ins.imm[0]));
      put_u64(out, std::bit_cast<std::uint64_t>(ins.imm[1]));
    }
  }
  return out;
}

Fingerprint fingerprint(const AlphaProgram& pruned) {
  static const int init = sodium_init();
  if (init < 0) throw std::runtime_error("libsodium initialization failed");
  const std::vector<std::uint8_t> bytes = canonical_bytes(pruned);
  Fingerprint f;
  crypto_generichash(f.bytes.data(), f.bytes.size(), bytes.data(), bytes.size(), nullptr, 0);
  return f;
}

}  // namespace alphaforge
