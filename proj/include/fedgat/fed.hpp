#pragma once

// Round-synchronous federated orchestration. Each round the server
// broadcasts the global model, every client runs local SGD steps on sampled
// train batches, emits the pseudo-gradient (theta_global - theta_local)/lr,
// privatizes it (clip + Gaussian noise), optionally poisons it, protects it
// per the configured backend, and uploads. The server aggregates to a
// weighted mean (robust rules available on the plain backend), applies
// theta -= lr * agg, evaluates the updated model on the clean federation,
// and records the round.
//
// Both transports run the same client loop in one thread per client; all
// client randomness derives from (client seed, round), so results are a
// pure function of seeds and config regardless of scheduling.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fedgat/anomaly.hpp"
#include "fedgat/dp.hpp"
#include "fedgat/gat.hpp"
#include "fedgat/graph.hpp"
#include "fedgat/metrics.hpp"
#include "fedgat/paillier.hpp"
#include "fedgat/rng.hpp"
#include "fedgat/secagg.hpp"
#include "fedgat/threat.hpp"
#include "fedgat/transport.hpp"

namespace fedgat {

enum class BackendKind { kPlain, kMasked, kPaillier };
enum class TransportKind { kInProc, kTcp };

inline std::string to_string(BackendKind b) {
  switch (b) {
    case BackendKind::kPlain: return "plain";
    case BackendKind::kMasked: return "masked";
    case BackendKind::kPaillier: return "paillier";
  }
  throw std::invalid_argument("unknown backend");
}

inline BackendKind backend_from_string(const std::string& s) {
  if (s == "plain") return BackendKind::kPlain;
  if (s == "masked") return BackendKind::kMasked;
  if (s == "paillier") return BackendKind::kPaillier;
  throw std::invalid_argument("unknown backend: " + s);
}

inline std::string to_string(TransportKind t) {
  return t == TransportKind::kInProc ? "inproc" : "tcp";
}

inline TransportKind transport_from_string(const std::string& s) {
  if (s == "inproc") return TransportKind::kInProc;
  if (s == "tcp") return TransportKind::kTcp;
  throw std::invalid_argument("unknown transport: " + s);
}

struct FedConfig {
  std::size_t num_clients = 10;
  std::size_t rounds = 100;
  double lr = 0.005;
  std::size_t local_steps = 5;
  std::size_t batch_nodes = 128;
  BackendKind backend = BackendKind::kPlain;
  DpConfig dp;
  RobustMode robust_mode = RobustMode::kOff;
  std::size_t trim_k = 2;
  AttackSpec attack;
  std::uint64_t master_seed = 42;
  GatHyper hyper;
  TransportKind transport = TransportKind::kInProc;
  unsigned paillier_bits = 1024;
};

inline void validate_fed(const FedConfig& cfg) {
  if (cfg.num_clients < 1) throw std::invalid_argument("fed: num_clients must be >= 1");
  if (cfg.rounds < 1) throw std::invalid_argument("fed: rounds must be >= 1");
  if (cfg.batch_nodes < 1) throw std::invalid_argument("fed: batch_nodes must be >= 1");
  if (cfg.local_steps < 1) throw std::invalid_argument("fed: local_steps must be >= 1");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("fed: lr must be > 0");
  if (cfg.robust_mode != RobustMode::kOff && cfg.backend != BackendKind::kPlain)
    throw std::invalid_argument(
        "fed: robust aggregation needs per-client visibility; use the plain backend");
  if (cfg.robust_mode == RobustMode::kTrimmedMean && 2 * cfg.trim_k >= cfg.num_clients)
    throw std::invalid_argument("fed: 2*trim_k must be < num_clients");
  validate_dp(cfg.dp);
  validate_attack(cfg.attack);
}

struct GradientUpdate {
  std::uint32_t client_id = 0;
  std::uint32_t round = 0;
  double weight = 0.0;  // labeled-node count, public metadata
  BackendKind payload_kind = BackendKind::kPlain;
  std::vector<double> plain;
  std::vector<std::uint64_t> masked;
  std::vector<mpz_class> ciphertexts;
  std::uint64_t bytes_on_wire = 0;
};

// ---- GradientUpdate wire form (UPDATE payload) ----
// u32 client_id, u32 round, f64 weight, u8 kind, u64 count, then the body:
// plain = count f64 LE; masked = count u64 LE; paillier = count ciphertext
// blobs (4-byte big-endian length + magnitude bytes).

inline std::string serialize_update(const GradientUpdate& u) {
  std::string out;
  detail::put_le<std::uint32_t>(out, u.client_id);
  detail::put_le<std::uint32_t>(out, u.round);
  detail::put_le<std::uint64_t>(out, detail::f64_bits(u.weight));
  out.push_back(static_cast<char>(u.payload_kind));
  switch (u.payload_kind) {
    case BackendKind::kPlain:
      detail::put_le<std::uint64_t>(out, u.plain.size());
      for (double x : u.plain) detail::put_le<std::uint64_t>(out, detail::f64_bits(x));
      break;
    case BackendKind::kMasked:
      detail::put_le<std::uint64_t>(out, u.masked.size());
      for (auto x : u.masked) detail::put_le<std::uint64_t>(out, x);
      break;
    case BackendKind::kPaillier:
      detail::put_le<std::uint64_t>(out, u.ciphertexts.size());
      for (const auto& c : u.ciphertexts) out += ciphertext_to_bytes(c);
      break;
  }
  return out;
}

inline GradientUpdate parse_update(const std::string& payload) {
  std::span<const std::uint8_t> buf(reinterpret_cast<const std::uint8_t*>(payload.data()),
                                    payload.size());
  std::size_t pos = 0;
  GradientUpdate u;
  u.client_id = detail::get_le<std::uint32_t>(buf, pos);
  u.round = detail::get_le<std::uint32_t>(buf, pos);
  u.weight = detail::bits_f64(detail::get_le<std::uint64_t>(buf, pos));
  if (pos >= buf.size()) throw std::invalid_argument("update: truncated kind");
  u.payload_kind = static_cast<BackendKind>(buf[pos++]);
  const auto count = detail::get_le<std::uint64_t>(buf, pos);
  switch (u.payload_kind) {
    case BackendKind::kPlain:
      u.plain.resize(count);
      for (auto& x : u.plain) x = detail::bits_f64(detail::get_le<std::uint64_t>(buf, pos));
      break;
    case BackendKind::kMasked:
      u.masked.resize(count);
      for (auto& x : u.masked) x = detail::get_le<std::uint64_t>(buf, pos);
      break;
    case BackendKind::kPaillier: {
      u.ciphertexts.resize(count);
      for (auto& c : u.ciphertexts) c = ciphertext_from_bytes(payload, pos);
      break;
    }
    default:
      throw std::invalid_argument("update: unknown payload kind");
  }
  if (pos != payload.size()) throw std::invalid_argument("update: trailing bytes");
  return u;
}

// ---- client side ----

struct ClientRuntime {
  std::size_t id = 0;
  Graph graph;  // training view; label-flipped when this client is malicious
  std::uint64_t seed = 0;
  bool malicious = false;
  double weight = 0.0;
  double weight_share = 0.0;  // weight / sum of weights, public
  FedConfig cfg;
  PairwiseSecrets secrets;
  PaillierPublicKey paillier_pk;
  FixedPointCodec codec;
  std::vector<std::size_t> train_nodes;
};

// The privatized (and, for a malicious client, poisoned) pseudo-gradient.
// Pure function of (client, global params, round).
inline std::vector<double> compute_update(const ClientRuntime& c, const ModelParams& global,
                                          std::uint32_t round) {
  const FedConfig& cfg = c.cfg;
  Rng batch_rng(mix64(mix64(c.seed, stream::kBatch), round));
  ModelParams local = global;
  std::vector<std::uint8_t> batch_mask(c.graph.num_nodes, 0);
  for (std::size_t step = 0; step < cfg.local_steps; ++step) {
    std::fill(batch_mask.begin(), batch_mask.end(), 0);
    if (c.train_nodes.size() <= cfg.batch_nodes) {
      for (auto v : c.train_nodes) batch_mask[v] = 1;
    } else {
      for (auto idx : batch_rng.sample_without_replacement(c.train_nodes.size(), cfg.batch_nodes))
        batch_mask[c.train_nodes[idx]] = 1;
    }
    auto res = backward(c.graph, local, c.graph.labels, batch_mask);
    local = sgd_step(local, res.grad, cfg.lr);
  }

  const std::vector<double> g_flat = global.flatten();
  const std::vector<double> l_flat = local.flatten();
  std::vector<double> pseudo(g_flat.size());
  for (std::size_t i = 0; i < pseudo.size(); ++i) pseudo[i] = (g_flat[i] - l_flat[i]) / cfg.lr;

  Rng noise_rng(mix64(mix64(c.seed, stream::kDpNoise), round));
  std::vector<double> priv = privatize(pseudo, cfg.dp, noise_rng);

  if (c.malicious && cfg.attack.kind != AttackKind::kLabelFlip) {
    Rng attack_rng(mix64(mix64(c.seed, stream::kAttack), round));
    priv = poison_gradient(priv, cfg.attack, attack_rng);
  }
  return priv;
}

// Backend protection. Protected backends pre-scale by the public weight
// share so the decoded sum is already the weighted mean.
inline GradientUpdate make_update(const ClientRuntime& c, const ModelParams& global,
                                  std::uint32_t round) {
  GradientUpdate u;
  u.client_id = static_cast<std::uint32_t>(c.id);
  u.round = round;
  u.weight = c.weight;
  u.payload_kind = c.cfg.backend;
  std::vector<double> update = compute_update(c, global, round);
  switch (c.cfg.backend) {
    case BackendKind::kPlain:
      u.plain = std::move(update);
      break;
    case BackendKind::kMasked: {
      for (auto& x : update) x *= c.weight_share;
      const auto enc = encode_fixed(update, c.codec);
      MaskingContext ctx{c.id, round, &c.secrets};
      u.masked = mask_update(ring_embed(enc), ctx);
      break;
    }
    case BackendKind::kPaillier: {
      for (auto& x : update) x *= c.weight_share;
      const auto enc = encode_fixed(update, c.codec);
      Rng enc_rng(mix64(mix64(c.seed, stream::kClient), round));
      u.ciphertexts = paillier_encrypt_vector(enc, c.paillier_pk, enc_rng);
      break;
    }
  }
  return u;
}

// HELLO payload: u32 client_id, f64 weight.
inline std::string serialize_hello(std::uint32_t client_id, double weight) {
  std::string out;
  detail::put_le<std::uint32_t>(out, client_id);
  detail::put_le<std::uint64_t>(out, detail::f64_bits(weight));
  return out;
}

inline std::pair<std::uint32_t, double> parse_hello(const std::string& payload) {
  std::span<const std::uint8_t> buf(reinterpret_cast<const std::uint8_t*>(payload.data()),
                                    payload.size());
  std::size_t pos = 0;
  const auto id = detail::get_le<std::uint32_t>(buf, pos);
  const double w = detail::bits_f64(detail::get_le<std::uint64_t>(buf, pos));
  if (pos != payload.size()) throw std::invalid_argument("hello: trailing bytes");
  return {id, w};
}

// Blocking client loop: HELLO, then answer every GLOBAL_MODEL with an
// UPDATE until SHUTDOWN. Rounds are counted locally (broadcast r is the
// r-th model received), keeping the checkpoint payload format pure.
inline void run_client_loop(Channel& ch, const ClientRuntime& c) {
  ch.send({MsgType::kHello, serialize_hello(static_cast<std::uint32_t>(c.id), c.weight)});
  std::uint32_t round = 0;
  for (;;) {
    const Message m = ch.recv();
    switch (m.type) {
      case MsgType::kGlobalModel: {
        const ModelParams global = deserialize_model(m.payload);
        ++round;
        ch.send({MsgType::kUpdate, serialize_update(make_update(c, global, round))});
        break;
      }
      case MsgType::kRoundDone:
        break;
      case MsgType::kShutdown:
        return;
      default:
        throw std::runtime_error("client: unexpected message type");
    }
  }
}

// ---- server side ----

// Holds the Paillier secret key; a role distinct from the aggregation
// server, which only ever sees the public key and ciphertexts.
class KeyAuthority {
 public:
  static KeyAuthority create(unsigned key_bits, std::uint64_t master_seed) {
    Rng rng(mix64(master_seed, stream::kKeygen));
    return KeyAuthority(paillier_keygen(key_bits, rng));
  }

  const PaillierPublicKey& public_key() const { return kp_.pk; }

  std::vector<double> decrypt_aggregate(const std::vector<mpz_class>& agg,
                                        const FixedPointCodec& codec, std::size_t k) const {
    return paillier_decrypt_aggregate(agg, kp_, codec, k);
  }

 private:
  explicit KeyAuthority(PaillierKeypair kp) : kp_(std::move(kp)) {}
  PaillierKeypair kp_;
};

struct AggregateOutcome {
  std::vector<double> value;
  std::vector<std::size_t> dropped;  // norm_filter rejects, by client id
  bool all_filtered = false;
};

// updates must be sorted by client_id; protected sums decode directly to the
// weighted mean because clients pre-scaled.
inline AggregateOutcome aggregate(const std::vector<GradientUpdate>& updates,
                                  const FedConfig& cfg, const KeyAuthority* authority,
                                  const FixedPointCodec& codec) {
  if (updates.size() != cfg.num_clients)
    throw std::invalid_argument("aggregate: expected " + std::to_string(cfg.num_clients) +
                                " updates, got " + std::to_string(updates.size()));
  for (const auto& u : updates)
    if (u.round != updates.front().round) throw std::invalid_argument("aggregate: round mismatch");

  AggregateOutcome out;
  switch (cfg.backend) {
    case BackendKind::kPlain: {
      std::vector<std::vector<double>> vecs;
      std::vector<double> weights;
      vecs.reserve(updates.size());
      for (const auto& u : updates) {
        vecs.push_back(u.plain);
        weights.push_back(u.weight);
      }
      if (cfg.robust_mode == RobustMode::kOff) {
        const std::size_t dim = vecs.front().size();
        out.value.assign(dim, 0.0);
        double wsum = 0.0;
        for (std::size_t i = 0; i < vecs.size(); ++i) {
          for (std::size_t c = 0; c < dim; ++c) out.value[c] += weights[i] * vecs[i][c];
          wsum += weights[i];
        }
        for (auto& x : out.value) x /= wsum;
      } else {
        auto res = robust_aggregate(vecs, weights, cfg.robust_mode, cfg.trim_k);
        out.value = std::move(res.aggregate);
        for (auto i : res.dropped) out.dropped.push_back(updates[i].client_id);
        out.all_filtered = res.all_filtered;
      }
      break;
    }
    case BackendKind::kMasked: {
      std::vector<std::vector<std::uint64_t>> masked;
      masked.reserve(updates.size());
      for (const auto& u : updates) masked.push_back(u.masked);
      out.value = decode_ring_sum(unmask_sum(masked), codec);
      break;
    }
    case BackendKind::kPaillier: {
      if (authority == nullptr) throw std::invalid_argument("aggregate: no key authority");
      std::vector<std::vector<mpz_class>> cts;
      cts.reserve(updates.size());
      for (const auto& u : updates) cts.push_back(u.ciphertexts);
      const auto agg = paillier_aggregate(cts, authority->public_key());
      out.value = authority->decrypt_aggregate(agg, codec, updates.size());
      break;
    }
  }
  return out;
}

struct EvalResult {
  double train_loss_avg = 0.0;
  double test_accuracy = 0.0;
};

// Pooled evaluation on the clean federation: node-count-weighted train loss
// and pooled test accuracy.
inline EvalResult evaluate_global(const ModelParams& p, const std::vector<Graph>& graphs) {
  double loss_num = 0.0;
  std::size_t train_total = 0, correct_total = 0, test_total = 0;
  for (const auto& g : graphs) {
    const ForwardTrace t = model_forward(g, p);
    const std::size_t train_count = g.count_train();
    loss_num += masked_loss(t.logits(), g.labels, g.train_mask) * static_cast<double>(train_count);
    train_total += train_count;
    correct_total += correct_count(t.logits(), g.labels, g.test_mask);
    test_total += g.count_test();
  }
  if (train_total == 0 || test_total == 0)
    throw std::invalid_argument("evaluate_global: empty train or test pool");
  EvalResult r;
  r.train_loss_avg = loss_num / static_cast<double>(train_total);
  r.test_accuracy = static_cast<double>(correct_total) / static_cast<double>(test_total);
  return r;
}

struct ExperimentResult {
  std::vector<RoundRecord> records;
  ModelParams final_params;
  std::vector<std::size_t> malicious;
  std::vector<Graph> train_views;  // per-client training graphs (post label-flip)
};

// Builds per-client runtimes: seeds, weights, attack assignment, secagg
// material. Evaluation always uses the clean input graphs.
inline std::vector<ClientRuntime> make_clients(const FedConfig& cfg,
                                               const std::vector<Graph>& graphs,
                                               const KeyAuthority* authority) {
  if (graphs.size() != cfg.num_clients)
    throw std::invalid_argument("fed: need one graph per client");
  const auto malicious = malicious_clients(cfg.num_clients, cfg.attack);
  const PairwiseSecrets secrets = PairwiseSecrets::deal(cfg.num_clients, cfg.master_seed);

  std::vector<ClientRuntime> clients(cfg.num_clients);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < cfg.num_clients; ++i) {
    ClientRuntime& c = clients[i];
    c.id = i;
    c.graph = graphs[i];
    c.seed = mix64(cfg.master_seed, mix64(stream::kClient, i));
    c.malicious = std::binary_search(malicious.begin(), malicious.end(), i);
    if (c.malicious && cfg.attack.kind == AttackKind::kLabelFlip) {
      AttackSpec per_client = cfg.attack;
      per_client.seed = c.seed;
      c.graph = apply_label_flip(c.graph, per_client, cfg.hyper.num_classes);
    }
    const std::size_t train_count = c.graph.count_train();
    if (train_count == 0)
      throw std::invalid_argument("fed: client " + std::to_string(i) + " has no labeled nodes");
    c.weight = static_cast<double>(train_count);
    weight_sum += c.weight;
    c.cfg = cfg;
    c.secrets = secrets;
    if (cfg.backend == BackendKind::kPaillier) {
      if (authority == nullptr) throw std::invalid_argument("fed: paillier needs a key authority");
      c.paillier_pk = authority->public_key();
    }
    for (std::size_t v = 0; v < c.graph.num_nodes; ++v)
      if (c.graph.train_mask[v]) c.train_nodes.push_back(v);
  }
  for (auto& c : clients) c.weight_share = c.weight / weight_sum;
  return clients;
}

// Runs the full experiment over the chosen transport. CSV rows are emitted
// incrementally when sinks are given; metrics.csv holds no timing so equal
// seeds reproduce it byte for byte (wall clock goes to the timing sink).
inline ExperimentResult run_experiment(const FedConfig& cfg, const std::vector<Graph>& graphs,
                                       std::ostream* metrics_csv = nullptr,
                                       std::ostream* timing_csv = nullptr) {
  validate_fed(cfg);
  std::optional<KeyAuthority> authority;
  if (cfg.backend == BackendKind::kPaillier)
    authority = KeyAuthority::create(cfg.paillier_bits, cfg.master_seed);
  std::vector<ClientRuntime> clients =
      make_clients(cfg, graphs, authority ? &*authority : nullptr);

  // Transport bring-up: one duplex channel and one client thread per client.
  // Client threads swallow their own errors after closing the channel, so
  // the server sees a broken protocol rather than a terminate().
  std::vector<std::unique_ptr<Channel>> server_ends(cfg.num_clients);
  std::vector<std::unique_ptr<Channel>> client_ends(cfg.num_clients);
  std::vector<std::thread> threads;
  std::optional<TcpListener> listener;
  auto client_body = [&clients, &client_ends](std::size_t i) {
    try {
      run_client_loop(*client_ends[i], clients[i]);
    } catch (...) {
      try {
        client_ends[i]->send({MsgType::kShutdown, std::string()});
      } catch (...) {
      }
    }
  };
  if (cfg.transport == TransportKind::kInProc) {
    for (std::size_t i = 0; i < cfg.num_clients; ++i) {
      auto [server_end, client_end] = make_inproc_pair();
      server_ends[i] = std::move(server_end);
      client_ends[i] = std::move(client_end);
    }
    for (std::size_t i = 0; i < cfg.num_clients; ++i)
      threads.emplace_back(client_body, i);
  } else {
    listener.emplace();
    const std::uint16_t port = listener->port();
    for (std::size_t i = 0; i < cfg.num_clients; ++i)
      threads.emplace_back([&client_body, &client_ends, i, port] {
        client_ends[i] = tcp_connect(port);
        client_body(i);
      });
    for (std::size_t i = 0; i < cfg.num_clients; ++i) server_ends[i] = listener->accept();
  }

  std::vector<std::unique_ptr<Channel>> by_client(cfg.num_clients);
  auto stop_clients = [&] {
    for (auto& ch : by_client)
      if (ch) {
        try {
          ch->send({MsgType::kShutdown, std::string()});
        } catch (...) {
        }
      }
    for (auto& ch : server_ends)
      if (ch) {
        try {
          ch->send({MsgType::kShutdown, std::string()});
        } catch (...) {
        }
      }
    for (auto& t : threads)
      if (t.joinable()) t.join();
  };

  ExperimentResult result;
  try {
    // HELLO phase: map channels to client ids (TCP accept order is arbitrary).
    for (auto& ch : server_ends) {
      const Message m = ch->recv();
      if (m.type != MsgType::kHello) throw std::runtime_error("server: expected HELLO");
      const auto [id, weight] = parse_hello(m.payload);
      if (id >= cfg.num_clients || by_client[id] != nullptr)
        throw std::runtime_error("server: bad HELLO client id");
      (void)weight;
      by_client[id] = std::move(ch);
    }

    result.malicious = malicious_clients(cfg.num_clients, cfg.attack);
    ModelParams params = ModelParams::glorot(cfg.hyper, cfg.master_seed);
    const FixedPointCodec codec;

    std::uint64_t prev_up = 0, prev_down = 0;
    if (metrics_csv) *metrics_csv << metrics_csv_header();
    if (timing_csv) *timing_csv << "round,wall_ms\n";

    for (std::uint32_t round = 1; round <= cfg.rounds; ++round) {
      const auto t0 = std::chrono::steady_clock::now();

      const std::string model_blob = serialize_model(params);
      for (auto& ch : by_client) ch->send({MsgType::kGlobalModel, model_blob});

      std::vector<GradientUpdate> updates;
      updates.reserve(cfg.num_clients);
      for (auto& ch : by_client) {
        const Message m = ch->recv();
        if (m.type != MsgType::kUpdate) throw std::runtime_error("server: expected UPDATE");
        GradientUpdate u = parse_update(m.payload);
        if (u.round != round) throw std::runtime_error("server: update for wrong round");
        u.bytes_on_wire = frame_size(m);
        updates.push_back(std::move(u));
      }
      std::sort(updates.begin(), updates.end(),
                [](const GradientUpdate& a, const GradientUpdate& b) {
                  return a.client_id < b.client_id;
                });

      const AggregateOutcome agg = aggregate(updates, cfg, authority ? &*authority : nullptr, codec);
      std::vector<double> flat = params.flatten();
      for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= cfg.lr * agg.value[i];
      params = ModelParams::unflatten(flat, cfg.hyper);

      for (auto& ch : by_client) ch->send({MsgType::kRoundDone, std::string()});

      const EvalResult ev = evaluate_global(params, graphs);
      const auto t1 = std::chrono::steady_clock::now();

      std::uint64_t up = 0, down = 0;
      for (const auto& ch : by_client) {
        up += ch->bytes_received();
        down += ch->bytes_sent();
      }

      RoundRecord rec;
      rec.round = round;
      rec.train_loss_avg = ev.train_loss_avg;
      rec.test_accuracy = ev.test_accuracy;
      rec.bytes_up = up - prev_up;
      rec.bytes_down = down - prev_down;
      prev_up = up;
      prev_down = down;
      rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      rec.epsilon = epsilon_report(cfg.dp, round);
      rec.backend = to_string(cfg.backend);
      if (agg.all_filtered) {
        rec.notes = "all_filtered";
      } else if (!agg.dropped.empty()) {
        rec.notes = "dropped=";
        for (std::size_t i = 0; i < agg.dropped.size(); ++i) {
          if (i) rec.notes += ';';
          rec.notes += std::to_string(agg.dropped[i]);
        }
      }
      if (metrics_csv) {
        *metrics_csv << metrics_csv_row(rec);
        metrics_csv->flush();
      }
      if (timing_csv) {
        char ms[64];
        std::snprintf(ms, sizeof ms, "%.3f", rec.wall_ms);
        *timing_csv << rec.round << ',' << ms << '\n';
        timing_csv->flush();
      }
      result.records.push_back(std::move(rec));
    }

    for (auto& ch : by_client) ch->send({MsgType::kShutdown, std::string()});
    for (auto& t : threads) t.join();
    result.final_params = std::move(params);
    for (auto& c : clients) result.train_views.push_back(std::move(c.graph));
    return result;
  } catch (...) {
    // Round abort: wind down client threads, then surface the error with
    // whatever log rows were already flushed.
    stop_clients();
    throw;
  }
}

}  // namespace fedgat
