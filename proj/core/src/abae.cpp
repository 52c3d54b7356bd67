// Copyright 2026 The STEREO Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stereo/abae.hpp"

#include <algorithm>
#include <numeric>

#include <zlib.h>

#include "stereo/error.hpp"
#include "stereo/text.hpp"

namespace stereo::abae {

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  Eigen::VectorXd e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

// Row-normalised copy; zero rows stay zero.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out = X;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double n = X.row(i).norm();
    if (n > 0) out.row(i) /= n;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd gather(const Eigen::MatrixXd& E, const std::vector<std::size_t>& ids) {
  std::vector<Eigen::Index> rows;
  for (std::size_t id : ids) {
    if (id == kPad) continue;
    if (id >= static_cast<std::size_t>(E.rows())) throw Error("word id " + std::to_string(id) + " out of range");
    rows.push_back(static_cast<Eigen::Index>(id));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), E.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = E.row(rows[i]);
  return out;
}

Eigen::VectorXd attention_weights(const Eigen::MatrixXd& words, const Eigen::MatrixXd& M) {
  if (words.rows() == 0) throw Error("attention over a sentence without words");
  Eigen::VectorXd y = words.colwise().mean().transpose();
  return softmax(words * (M * y));
}

Eigen::VectorXd sentence_embedding(const Eigen::MatrixXd& words, const Eigen::VectorXd& a) {
  if (words.rows() != a.size()) throw Error("attention weights and words differ in length");
  return words.transpose() * a;
}

Forward aspect_forward(const Eigen::VectorXd& z, const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                       const Eigen::MatrixXd& T) {
  Forward f;
  f.p = softmax(W * z + b);
  f.r = T.transpose() * f.p;
  return f;
}

double hinge_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& r, const Eigen::MatrixXd& negatives) {
  double pos = r.dot(z);
  double j = 0;
  for (Eigen::Index i = 0; i < negatives.rows(); ++i) j += std::max(0.0, 1.0 - pos + negatives.row(i).dot(r));
  return j;
}

double orthogonality(const Eigen::MatrixXd& T) {
  Eigen::MatrixXd Tn = normalize_rows(T);
  Eigen::MatrixXd G = Tn * Tn.transpose() - Eigen::MatrixXd::Identity(T.rows(), T.rows());
  return G.norm();
}

double loss(const Eigen::VectorXd& z, const Eigen::VectorXd& r, const Eigen::MatrixXd& negatives,
            const Eigen::MatrixXd& T, double lambda) {
  return hinge_loss(z, r, negatives) + lambda * orthogonality(T);
}

Gradients Gradients::zeros_like(const Parameters& p) {
  return {Eigen::MatrixXd::Zero(p.M.rows(), p.M.cols()), Eigen::MatrixXd::Zero(p.W.rows(), p.W.cols()),
          Eigen::VectorXd::Zero(p.b.size()), Eigen::MatrixXd::Zero(p.T.rows(), p.T.cols())};
}

double batch_loss(const Parameters& params, const std::vector<const std::vector<std::size_t>*>& batch,
                  const std::vector<Eigen::MatrixXd>& negatives, double lambda, Gradients* g) {
  if (batch.size() != negatives.size()) throw Error("batch and negative samples differ in length");
  if (g) *g = Gradients::zeros_like(params);
  const double scale = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());
  double total = 0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    Eigen::MatrixXd e = gather(params.E, *batch[s]);
    Eigen::VectorXd y = e.colwise().mean().transpose();
    Eigen::VectorXd a = softmax(e * (params.M * y));
    Eigen::VectorXd z = e.transpose() * a;
    Forward f = aspect_forward(z, params.W, params.b, params.T);
    const Eigen::MatrixXd& neg = negatives[s];

    double pos = f.r.dot(z);
    double j = 0;
    double active = 0;
    Eigen::VectorXd nsum = Eigen::VectorXd::Zero(z.size());
    for (Eigen::Index i = 0; i < neg.rows(); ++i) {
      double margin = 1.0 - pos + neg.row(i).dot(f.r);
      if (margin > 0) {
        j += margin;
        active += 1;
        nsum += neg.row(i).transpose();
      }
    }
    total += scale * j;
    if (!g || active == 0) continue;

    // Backpropagate through r = Tᵀp, p = softmax(Wz + b), z = eᵀa, a = softmax(e M y).
    Eigen::VectorXd g_r = scale * (nsum - active * z);
    Eigen::VectorXd g_z = -scale * active * f.r;
    g->T += f.p * g_r.transpose();
    Eigen::VectorXd g_p = params.T * g_r;
    Eigen::VectorXd g_s = f.p.cwiseProduct(g_p - Eigen::VectorXd::Constant(g_p.size(), f.p.dot(g_p)));
    g->W += g_s * z.transpose();
    g->b += g_s;
    g_z += params.W.transpose() * g_s;
    Eigen::VectorXd g_a = e * g_z;
    Eigen::VectorXd g_d = a.cwiseProduct(g_a - Eigen::VectorXd::Constant(a.size(), a.dot(g_a)));
    g->M += (e.transpose() * g_d) * y.transpose();
  }

  double u = orthogonality(params.T);
  total += lambda * u;
  if (g && lambda != 0 && u > 0) {
    Eigen::MatrixXd Tn = normalize_rows(params.T);
    Eigen::MatrixXd G = Tn * Tn.transpose() - Eigen::MatrixXd::Identity(Tn.rows(), Tn.rows());
    Eigen::MatrixXd g_tn = (2.0 / u) * G * Tn;
    for (Eigen::Index k = 0; k < Tn.rows(); ++k) {
      double norm = params.T.row(k).norm();
      if (norm == 0) continue;
      Eigen::RowVectorXd t = Tn.row(k);
      Eigen::RowVectorXd gk = g_tn.row(k);
      g->T.row(k) += lambda * (gk - gk.dot(t) * t) / norm;
    }
  }
  return total;
}

Assignment infer(const Parameters& params, const std::vector<std::size_t>& ids) {
  Assignment out;
  std::vector<std::size_t> known;
  for (std::size_t id : ids) {
    if (id != kPad && id < static_cast<std::size_t>(params.E.rows())) known.push_back(id);
  }
  if (known.empty()) {
    out.no_signal = true;
    return out;
  }
  Eigen::MatrixXd e = gather(params.E, known);
  Eigen::VectorXd z = sentence_embedding(e, attention_weights(e, params.M));
  out.p = aspect_forward(z, params.W, params.b, params.T).p;
  out.aspect = 0;
  for (Eigen::Index k = 1; k < out.p.size(); ++k) {
    if (out.p(k) > out.p(out.aspect)) out.aspect = static_cast<int>(k);
  }
  return out;
}

std::vector<std::vector<RankedWord>> representative_words(const Parameters& params, std::size_t top_n) {
  Eigen::MatrixXd En = normalize_rows(params.E);
  Eigen::MatrixXd Tn = normalize_rows(params.T);
  Eigen::MatrixXd sim = Tn * En.transpose();
  top_n = std::min<std::size_t>(top_n, params.words.size());
  std::vector<std::vector<RankedWord>> out;
  for (Eigen::Index k = 0; k < sim.rows(); ++k) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(sim.cols()));
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(top_n), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        double sa = sim(k, static_cast<Eigen::Index>(a));
                        double sb = sim(k, static_cast<Eigen::Index>(b));
                        return sa != sb ? sa > sb : a < b;
                      });
    std::vector<RankedWord> words;
    for (std::size_t i = 0; i < top_n; ++i) {
      words.push_back({params.words[idx[i]], sim(k, static_cast<Eigen::Index>(idx[i]))});
    }
    out.push_back(std::move(words));
  }
  return out;
}

std::uint32_t file_crc32(const std::filesystem::path& path) {
  std::string data = read_file(path);
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* bytes = reinterpret_cast<const Bytef*>(data.data());
  std::size_t left = data.size();
  while (left > 0) {
    auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, bytes, chunk);
    bytes += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* name) {
  auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || static_cast<Eigen::Index>(data.size()) != shape[0] * shape[1]) {
    throw ParseError(std::string("model array ") + name + " does not match its shape");
  }
  Eigen::MatrixXd m(shape[0], shape[1]);
  for (Eigen::Index i = 0; i < shape[0]; ++i) {
    for (Eigen::Index k = 0; k < shape[1]; ++k) m(i, k) = data[static_cast<std::size_t>(i * shape[1] + k)];
  }
  if (!m.allFinite()) throw ParseError(std::string("model array ") + name + " has non-finite values");
  return m;
}

}  // namespace

void save_model(const std::filesystem::path& dir, const Parameters& params, const Config& config,
                const std::filesystem::path& embedding_path) {
  std::filesystem::create_directories(dir);
  auto abs = std::filesystem::absolute(embedding_path);
  nlohmann::json j;
  j["config"] = to_json(config);
  j["embedding"] = {{"path", abs.string()}, {"crc32", file_crc32(abs)}, {"rows", params.E.rows()},
                    {"dim", params.E.cols()}};
  j["M"] = matrix_json(params.M);
  j["W"] = matrix_json(params.W);
  j["b"] = matrix_json(params.b);
  j["T"] = matrix_json(params.T);
  write_file(dir / "model.json", j.dump() + "\n");
}

Model load_model(const std::filesystem::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / "model.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError((dir / "model.json").string() + ": " + e.what());
  }
  Model m;
  try {
    m.config = config_from_json(j.at("config"));
    m.embedding_path = j.at("embedding").at("path").get<std::string>();
    auto crc = j.at("embedding").at("crc32").get<std::uint32_t>();
    if (file_crc32(m.embedding_path) != crc) {
      throw Error("embedding " + m.embedding_path.string() + " changed since the model was trained (CRC-32 mismatch)");
    }
    auto emb = embed::load_embedding(m.embedding_path);
    m.params.words = std::move(emb.words);
    m.params.E = std::move(emb.vectors);
    m.params.M = matrix_from_json(j.at("M"), "M");
    m.params.W = matrix_from_json(j.at("W"), "W");
    m.params.b = matrix_from_json(j.at("b"), "b").col(0);
    m.params.T = matrix_from_json(j.at("T"), "T");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError((dir / "model.json").string() + ": " + e.what());
  }
  const auto d = m.params.E.cols();
  const auto k = m.params.T.rows();
  if (m.params.M.rows() != d || m.params.M.cols() != d || m.params.W.rows() != k || m.params.W.cols() != d ||
      m.params.b.size() != k || m.params.T.cols() != d) {
    throw ParseError((dir / "model.json").string() + ": parameter shapes are inconsistent");
  }
  return m;
}

void save_labels(const std::filesystem::path& dir, const std::map<int, std::string>& labels) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : labels) j[std::to_string(k)] = v;
  write_file(dir / "labels.json", j.dump(2) + "\n");
}

std::map<int, std::string> load_labels(const std::filesystem::path& dir) {
  std::map<int, std::string> out;
  auto path = dir / "labels.json";
  if (!std::filesystem::exists(path)) return out;
  try {
    auto j = nlohmann::json::parse(read_file(path));
    for (const auto& [k, v] : j.items()) out[std::stoi(k)] = v.get<std::string>();
  } catch (const std::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace stereo::abae
