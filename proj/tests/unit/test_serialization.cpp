#include <cmath>
#include <cstring>
#include <filesystem>

#include <gtest/gtest.h>

#include "qobs/checkpoint.hpp"
#include "qobs/errors.hpp"
#include "qobs/sampling.hpp"
#include "qobs/serialization.hpp"

using namespace qobs;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("qobs_test_" + name)).string();
}

}  // namespace

TEST(Numbers, NonFiniteRoundTrip) {
  EXPECT_EQ(number_to_json(kInfinity), "inf");
  EXPECT_EQ(number_to_json(-kInfinity), "-inf");
  EXPECT_EQ(number_to_json(std::nan("")), "nan");
  EXPECT_EQ(number_from_json(json("inf")), kInfinity);
  EXPECT_TRUE(std::isnan(number_from_json(json("nan"))));
  EXPECT_EQ(number_from_json(json(2.5)), 2.5);
  EXPECT_THROW(number_from_json(json("x")), ValidationError);
}

TEST(Hash, KnownVectors) {
  // FNV-1a 64 of the dump "null".
  EXPECT_EQ(config_hash(json(nullptr)), 0x5b9bc4ba528108e4ULL);
  EXPECT_EQ(hash_hex(0x1234), "0000000000001234");
  const json a = json::parse(R"({"b": 1, "a": [1, 2]})");
  const json b = json::parse(R"({"a": [1, 2], "b": 1})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(json::parse(R"({"a": [1, 2], "b": 2})")));
}

TEST(PotentialJson, RoundTripAllFamilies) {
  for (const PotentialFamily& fam :
       {PotentialFamily(InversePower{0.5, 2.0}), PotentialFamily(Logarithmic{1.5, -0.2}), PotentialFamily(BallMajumdar{32, 64, 0.5})}) {
    PotentialSpec s;
    s.family = fam;
    const json j = s;
    const PotentialSpec back = j.get<PotentialSpec>();
    EXPECT_EQ(json(back), j);
  }
}

TEST(PotentialJson, StrictParsing) {
  EXPECT_THROW(json::parse(R"({"family": "inverse_power", "q": 1})").get<PotentialSpec>(), ValidationError);
  EXPECT_THROW(json::parse(R"({"family": "cubic"})").get<PotentialSpec>(), ValidationError);
  EXPECT_THROW(json::parse(R"({"family": "inverse_power", "s": -1})").get<PotentialSpec>(), ValidationError);
  EXPECT_THROW(json::parse(R"({"family": "log", "k": "big"})").get<PotentialSpec>(), ValidationError);
  EXPECT_THROW(json::parse(R"({"s": 1})").get<PotentialSpec>(), ValidationError);
}

TEST(SolverJson, RoundTripAndValidation) {
  SolverConfig c;
  c.A = 0.5;
  c.bulk = BulkModel{};
  c.bulk->spec.family = BallMajumdar{};
  c.bulk->epsilon = 0.01;
  c.epsilon_schedule = {0.1, 0.01};
  c.grad_tol = 1e-7;
  c.general = ElasticModel{1.0, 0.3, 0.1};
  const json j = c;
  const SolverConfig back = j.get<SolverConfig>();
  EXPECT_EQ(json(back), j);
  EXPECT_FALSE(j.contains("threads"));
  EXPECT_FALSE(j.contains("seed"));

  json bad = j;
  bad["A"] = -0.7;
  bad.erase("elastic");
  EXPECT_THROW(bad.get<SolverConfig>(), ValidationError);
  bad = j;
  bad["tolerance"] = 1.0;
  EXPECT_THROW(bad.get<SolverConfig>(), ValidationError);
  bad = j;
  bad["epsilon_schedule"] = {0.01, 0.1};
  EXPECT_THROW(bad.get<SolverConfig>(), ValidationError);
}

TEST(BoundaryJson, RoundTrip) {
  BoundaryData twist;
  twist.S = 0.4;
  twist.director = BoundaryData::Director::Twist;
  twist.n = Vec3::UnitX();
  const json jt = twist;
  EXPECT_EQ(json(jt.get<BoundaryData>()), jt);

  BoundaryData constant;
  constant.kind = BoundaryData::Kind::ConstantTensor;
  constant.tensor = QTensor::uniaxial(0.3, Vec3(1, 1, 1));
  const json jc = constant;
  const BoundaryData back = jc.get<BoundaryData>();
  EXPECT_LT((back.tensor - constant.tensor).norm(), 1e-15);

  EXPECT_THROW(json::parse(R"({"kind": "uniaxial", "S": 1.2})").get<BoundaryData>(), ValidationError);
  EXPECT_THROW(json::parse(R"({"kind": "constant_tensor", "tensor": [[1,0,0],[0,0,0],[0,0,0]]})").get<BoundaryData>(),
               ValidationError);
  EXPECT_THROW(json::parse(R"({"kind": "uniaxial", "director": "splay"})").get<BoundaryData>(), ValidationError);
}

TEST(Reports, ExponentTableUsesInfStrings) {
  const json j = p_of_A(0.0);
  EXPECT_EQ(j.at("p"), "inf");
  EXPECT_EQ(j.at("q_max"), "inf");
  const json k = p_of_A(1.0);
  EXPECT_TRUE(k.at("p").is_number());
}

TEST(Reports, ScalingCsv) {
  ScalingReport r;
  r.levels = {0.2, 0.1};
  r.measures = {0.5, 0.25};
  EXPECT_EQ(scaling_csv(r), "a,measure\n0.20000000000000001,0.5\n0.10000000000000001,0.25\n");
  const json j = r;
  EXPECT_EQ(j.at("levels").size(), 2u);
}

TEST(Checkpoint, LayoutAndRoundTrip) {
  const Grid grid(4);
  BoundaryData d;
  d.S = 0.3;
  QField f = QField::make(grid, d, InitKind::Random, 3, 0.05);
  const auto bytes = encode_checkpoint(f, 0xabcdefULL);
  ASSERT_EQ(bytes.size(), 20u + 64u * 5u * 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "QOBS");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 4);
  EXPECT_EQ(bytes[12], 0xef);
  EXPECT_EQ(checkpoint_config_hash(bytes), 0xabcdefULL);
  // First value: coefficient 0 of node (1,1,1), little endian.
  double first;
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[20 + b]) << (8 * b);
  std::memcpy(&first, &bits, 8);
  EXPECT_EQ(first, f(1, 1, 1)[0]);

  const QField boundary = make_boundary(d, grid);
  const QField back = decode_checkpoint(bytes, boundary);
  EXPECT_EQ(back.max_difference(f), 0.0);
  EXPECT_EQ(back.at(0, 2, 2), f.at(0, 2, 2));

  const std::string path = temp_path("ckpt.bin");
  write_checkpoint(path, f, 0xabcdefULL);
  EXPECT_EQ(read_bytes(path), bytes);
  EXPECT_EQ(read_checkpoint(path, boundary).max_difference(f), 0.0);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsBadInput) {
  const Grid grid(4);
  const QField f(grid);
  auto bytes = encode_checkpoint(f);
  EXPECT_THROW(decode_checkpoint(bytes, QField(Grid(5))), ValidationError);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_checkpoint(truncated, f), ValidationError);
  auto wrong = bytes;
  wrong[0] = 'X';
  EXPECT_THROW(decode_checkpoint(wrong, f), ValidationError);
  wrong = bytes;
  wrong[4] = 9;
  EXPECT_THROW(decode_checkpoint(wrong, f), ValidationError);
}

TEST(Trace, CsvFormat) {
  std::vector<TraceRow> t = {{0, 2.0, 1.5, 0.5, 0.25}, {1, 1.0, 0.75, 0.25, 0.125}};
  EXPECT_EQ(trace_csv(t, {"config_hash=abc"}),
            "# config_hash=abc\niter,total,elastic,bulk,grad_norm\n0,2,1.5,0.5,0.25\n1,1,0.75,0.25,0.125\n");
}
