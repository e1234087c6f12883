// Copyright 2026 The GraphSentry Authors. All Rights Reserved.
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

#include "graphsentry/onnx_io.h"

#include <bit>
#include <fstream>
#include <set>

#include "graphsentry/error.h"
#include "proto_wire.h"

namespace graphsentry {

namespace {

using wire::Reader;
using wire::WireType;
using wire::Writer;

// Field numbers from onnx.proto.
namespace model_field {
constexpr uint32_t kIrVersion = 1;
constexpr uint32_t kProducerName = 2;
constexpr uint32_t kGraph = 7;
constexpr uint32_t kOpsetImport = 8;
}  // namespace model_field

namespace graph_field {
constexpr uint32_t kNode = 1;
constexpr uint32_t kName = 2;
constexpr uint32_t kInitializer = 5;
constexpr uint32_t kInput = 11;
constexpr uint32_t kOutput = 12;
constexpr uint32_t kSparseInitializer = 15;
}  // namespace graph_field

namespace node_field {
constexpr uint32_t kInput = 1;
constexpr uint32_t kOutput = 2;
constexpr uint32_t kName = 3;
constexpr uint32_t kOpType = 4;
constexpr uint32_t kAttribute = 5;
constexpr uint32_t kDomain = 7;
}  // namespace node_field

namespace attr_field {
constexpr uint32_t kName = 1;
constexpr uint32_t kF = 2;
constexpr uint32_t kI = 3;
constexpr uint32_t kS = 4;
constexpr uint32_t kT = 5;
constexpr uint32_t kG = 6;
constexpr uint32_t kFloats = 7;
constexpr uint32_t kInts = 8;
constexpr uint32_t kType = 20;
constexpr uint32_t kRefAttrName = 21;
}  // namespace attr_field

// AttributeProto.AttributeType
enum AttrType : int64_t {
  kAttrFloat = 1,
  kAttrInt = 2,
  kAttrString = 3,
  kAttrTensor = 4,
  kAttrGraph = 5,
  kAttrFloats = 6,
  kAttrInts = 7,
};

namespace tensor_field {
constexpr uint32_t kDims = 1;
constexpr uint32_t kDataType = 2;
constexpr uint32_t kSegment = 3;
constexpr uint32_t kFloatData = 4;
constexpr uint32_t kInt32Data = 5;
constexpr uint32_t kInt64Data = 7;
constexpr uint32_t kName = 8;
constexpr uint32_t kRawData = 9;
constexpr uint32_t kExternalData = 13;
constexpr uint32_t kDataLocation = 14;
}  // namespace tensor_field

constexpr int64_t kIrVersionWritten = 8;

// ---------------------------------------------------------------------------
// Reading

void ReadRepeatedVarint(Reader& r, WireType type, std::vector<int64_t>& out) {
  if (type == wire::kLengthDelimited) {
    Reader packed(r.ReadBytes());
    while (!packed.done()) {
      out.push_back(static_cast<int64_t>(packed.ReadVarint()));
    }
  } else if (type == wire::kVarint) {
    out.push_back(static_cast<int64_t>(r.ReadVarint()));
  } else {
    Reader::Fail("bad wire type for repeated varint");
  }
}

void ReadRepeatedFloat(Reader& r, WireType type, std::vector<float>& out) {
  if (type == wire::kLengthDelimited) {
    Reader packed(r.ReadBytes());
    while (!packed.done()) {
      out.push_back(std::bit_cast<float>(packed.ReadFixed32()));
    }
  } else if (type == wire::kFixed32) {
    out.push_back(std::bit_cast<float>(r.ReadFixed32()));
  } else {
    Reader::Fail("bad wire type for repeated float");
  }
}

void Expect(WireType got, WireType want, const char* what) {
  if (got != want) Reader::Fail(std::string("bad wire type for ") + what);
}

Tensor ReadTensor(std::span<const uint8_t> bytes, std::string* name_out) {
  Reader r(bytes);
  Shape dims;
  int64_t data_type = 0;
  std::vector<float> float_data;
  std::vector<int64_t> int32_data;
  std::vector<int64_t> int64_data;
  std::span<const uint8_t> raw;
  bool has_raw = false;
  uint32_t field;
  WireType type;
  while (r.NextField(field, type)) {
    switch (field) {
      case tensor_field::kDims: ReadRepeatedVarint(r, type, dims); break;
      case tensor_field::kDataType:
        Expect(type, wire::kVarint, "data_type");
        data_type = static_cast<int64_t>(r.ReadVarint());
        break;
      case tensor_field::kFloatData: ReadRepeatedFloat(r, type, float_data); break;
      case tensor_field::kInt32Data: ReadRepeatedVarint(r, type, int32_data); break;
      case tensor_field::kInt64Data: ReadRepeatedVarint(r, type, int64_data); break;
      case tensor_field::kName:
        Expect(type, wire::kLengthDelimited, "tensor name");
        if (name_out) {
          *name_out = r.ReadString();
        } else {
          r.Skip(type);
        }
        break;
      case tensor_field::kRawData:
        Expect(type, wire::kLengthDelimited, "raw_data");
        raw = r.ReadBytes();
        has_raw = true;
        break;
      case tensor_field::kSegment:
        throw Error(ErrorCode::kUnsupportedFeature, "segmented tensors");
      case tensor_field::kExternalData:
        throw Error(ErrorCode::kUnsupportedFeature, "external tensor data");
      case tensor_field::kDataLocation:
        Expect(type, wire::kVarint, "data_location");
        if (r.ReadVarint() != 0) {
          throw Error(ErrorCode::kUnsupportedFeature, "external tensor data");
        }
        break;
      default: r.Skip(type); break;
    }
  }
  for (int64_t d : dims) {
    if (d < 0) Reader::Fail("negative tensor dim");
  }
  const DType dtype = DTypeFromOnnx(static_cast<int32_t>(data_type));
  try {
    if (has_raw) return Tensor::FromRawBytes(dtype, dims, raw);
    switch (dtype) {
      case DType::kFloat32: return Tensor::F32(dims, std::move(float_data));
      case DType::kInt64: return Tensor::I64(dims, std::move(int64_data));
      case DType::kBool: {
        std::vector<uint8_t> b(int32_data.size());
        for (size_t i = 0; i < b.size(); ++i) b[i] = int32_data[i] != 0;
        return Tensor::Bool(dims, std::move(b));
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidTensor) Reader::Fail(e.what());
    throw;
  }
  return {};
}

Graph ReadGraph(std::span<const uint8_t> bytes);

std::pair<std::string, AttributeValue> ReadAttribute(
    std::span<const uint8_t> bytes) {
  Reader r(bytes);
  std::string name;
  int64_t declared = 0;
  std::optional<float> f;
  std::optional<int64_t> i;
  std::optional<std::string> s;
  std::optional<Tensor> t;
  GraphPtr g;
  std::vector<float> floats;
  std::vector<int64_t> ints;
  bool saw_floats = false;
  bool saw_ints = false;
  uint32_t field;
  WireType type;
  while (r.NextField(field, type)) {
    switch (field) {
      case attr_field::kName:
        Expect(type, wire::kLengthDelimited, "attribute name");
        name = r.ReadString();
        break;
      case attr_field::kF:
        Expect(type, wire::kFixed32, "attribute f");
        f = std::bit_cast<float>(r.ReadFixed32());
        break;
      case attr_field::kI:
        Expect(type, wire::kVarint, "attribute i");
        i = static_cast<int64_t>(r.ReadVarint());
        break;
      case attr_field::kS:
        Expect(type, wire::kLengthDelimited, "attribute s");
        s = r.ReadString();
        break;
      case attr_field::kT:
        Expect(type, wire::kLengthDelimited, "attribute t");
        t = ReadTensor(r.ReadBytes(), nullptr);
        break;
      case attr_field::kG:
        Expect(type, wire::kLengthDelimited, "attribute g");
        g = std::make_shared<const Graph>(ReadGraph(r.ReadBytes()));
        break;
      case attr_field::kFloats:
        saw_floats = true;
        ReadRepeatedFloat(r, type, floats);
        break;
      case attr_field::kInts:
        saw_ints = true;
        ReadRepeatedVarint(r, type, ints);
        break;
      case attr_field::kType:
        Expect(type, wire::kVarint, "attribute type");
        declared = static_cast<int64_t>(r.ReadVarint());
        break;
      case attr_field::kRefAttrName:
        throw Error(ErrorCode::kUnsupportedFeature,
                    "attribute references (ref_attr_name)");
      case 9: case 10: case 11: case 22: case 23:
        throw Error(ErrorCode::kUnsupportedFeature,
                    "attribute '" + name + "' uses an unsupported payload");
      default: r.Skip(type); break;
    }
  }
  if (name.empty()) Reader::Fail("attribute without a name");
  if (declared == 0) {
    // Pre-IR3 files omit the type; infer it from the populated field.
    if (g) declared = kAttrGraph;
    else if (t) declared = kAttrTensor;
    else if (s) declared = kAttrString;
    else if (saw_ints) declared = kAttrInts;
    else if (saw_floats) declared = kAttrFloats;
    else if (i) declared = kAttrInt;
    else if (f) declared = kAttrFloat;
  }
  switch (declared) {
    case kAttrFloat: return {name, f.value_or(0.0f)};
    case kAttrInt: return {name, i.value_or(0)};
    case kAttrString: return {name, s.value_or("")};
    case kAttrTensor:
      if (!t) Reader::Fail("tensor attribute '" + name + "' has no payload");
      return {name, *t};
    case kAttrGraph:
      if (!g) Reader::Fail("graph attribute '" + name + "' has no payload");
      return {name, g};
    case kAttrFloats: return {name, floats};
    case kAttrInts: return {name, ints};
    default:
      throw Error(ErrorCode::kUnsupportedFeature,
                  "attribute '" + name + "' has unsupported type " +
                      std::to_string(declared));
  }
}

Node ReadNode(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  Node n;
  std::string domain;
  uint32_t field;
  WireType type;
  while (r.NextField(field, type)) {
    switch (field) {
      case node_field::kInput:
        Expect(type, wire::kLengthDelimited, "node input");
        n.inputs.push_back(r.ReadString());
        break;
      case node_field::kOutput:
        Expect(type, wire::kLengthDelimited, "node output");
        n.outputs.push_back(r.ReadString());
        break;
      case node_field::kName:
        Expect(type, wire::kLengthDelimited, "node name");
        n.name = r.ReadString();
        break;
      case node_field::kOpType:
        Expect(type, wire::kLengthDelimited, "op_type");
        n.op_type = r.ReadString();
        break;
      case node_field::kAttribute: {
        Expect(type, wire::kLengthDelimited, "attribute");
        auto [key, value] = ReadAttribute(r.ReadBytes());
        n.attributes[key] = std::move(value);
        break;
      }
      case node_field::kDomain:
        Expect(type, wire::kLengthDelimited, "domain");
        domain = r.ReadString();
        break;
      default: r.Skip(type); break;
    }
  }
  if (!domain.empty() && domain != "ai.onnx") {
    throw Error(ErrorCode::kUnsupportedOperator, domain + "::" + n.op_type);
  }
  if (!IsSupportedOp(n.op_type)) {
    throw Error(ErrorCode::kUnsupportedOperator, n.op_type);
  }
  return n;
}

ValueInfo ReadValueInfo(std::span<const uint8_t> bytes, bool need_type) {
  Reader r(bytes);
  ValueInfo v;
  bool typed = false;
  uint32_t field;
  WireType type;
  while (r.NextField(field, type)) {
    if (field == 1) {
      Expect(type, wire::kLengthDelimited, "value name");
      v.name = r.ReadString();
    } else if (field == 2 && need_type) {
      Expect(type, wire::kLengthDelimited, "value type");
      Reader tp(r.ReadBytes());
      uint32_t tf;
      WireType tt;
      while (tp.NextField(tf, tt)) {
        if (tf != 1) {
          if (tf == 4 || tf == 5 || tf == 8 || tf == 9) {
            throw Error(ErrorCode::kUnsupportedFeature,
                        "non-tensor value type for '" + v.name + "'");
          }
          tp.Skip(tt);
          continue;
        }
        Expect(tt, wire::kLengthDelimited, "tensor_type");
        Reader tensor_type(tp.ReadBytes());
        uint32_t ef;
        WireType et;
        while (tensor_type.NextField(ef, et)) {
          if (ef == 1) {
            Expect(et, wire::kVarint, "elem_type");
            v.dtype = DTypeFromOnnx(static_cast<int32_t>(tensor_type.ReadVarint()));
            typed = true;
          } else if (ef == 2) {
            Expect(et, wire::kLengthDelimited, "shape");
            Reader shape(tensor_type.ReadBytes());
            uint32_t sf;
            WireType st;
            while (shape.NextField(sf, st)) {
              if (sf != 1) {
                shape.Skip(st);
                continue;
              }
              Expect(st, wire::kLengthDelimited, "dim");
              Reader dim(shape.ReadBytes());
              Dim d = Dim::Symbolic("?");
              uint32_t df;
              WireType dt;
              while (dim.NextField(df, dt)) {
                if (df == 1) {
                  Expect(dt, wire::kVarint, "dim_value");
                  d = Dim::Fixed(static_cast<int64_t>(dim.ReadVarint()));
                  if (d.value < 0) Reader::Fail("negative dim_value");
                } else if (df == 2) {
                  Expect(dt, wire::kLengthDelimited, "dim_param");
                  std::string p = dim.ReadString();
                  d = Dim::Symbolic(p.empty() ? "?" : p);
                } else {
                  dim.Skip(dt);
                }
              }
              v.shape.push_back(d);
            }
          } else {
            tensor_type.Skip(et);
          }
        }
      }
    } else {
      r.Skip(type);
    }
  }
  if (v.name.empty()) Reader::Fail("value info without a name");
  if (need_type && !typed) {
    throw Error(ErrorCode::kUnsupportedFeature,
                "graph input '" + v.name + "' has no tensor type");
  }
  return v;
}

Graph ReadGraph(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  Graph g;
  uint32_t field;
  WireType type;
  while (r.NextField(field, type)) {
    switch (field) {
      case graph_field::kNode:
        Expect(type, wire::kLengthDelimited, "node");
        g.nodes.push_back(ReadNode(r.ReadBytes()));
        break;
      case graph_field::kName:
        Expect(type, wire::kLengthDelimited, "graph name");
        g.name = r.ReadString();
        break;
      case graph_field::kInitializer: {
        Expect(type, wire::kLengthDelimited, "initializer");
        std::string name;
        Tensor t = ReadTensor(r.ReadBytes(), &name);
        if (name.empty()) Reader::Fail("initializer without a name");
        if (!g.initializers.emplace(name, std::move(t)).second) {
          Reader::Fail("duplicate initializer '" + name + "'");
        }
        break;
      }
      case graph_field::kInput:
        Expect(type, wire::kLengthDelimited, "graph input");
        g.inputs.push_back(ReadValueInfo(r.ReadBytes(), true));
        break;
      case graph_field::kOutput:
        Expect(type, wire::kLengthDelimited, "graph output");
        g.outputs.push_back(ReadValueInfo(r.ReadBytes(), false).name);
        break;
      case graph_field::kSparseInitializer:
        throw Error(ErrorCode::kUnsupportedFeature, "sparse initializers");
      default: r.Skip(type); break;
    }
  }
  // Older exporters list initializers among the inputs; those are defaults,
  // not required bindings, and stay in the signature untouched.
  std::set<std::string> used;
  for (const Node& n : g.nodes) {
    if (!n.name.empty()) used.insert(n.name);
  }
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    Node& n = g.nodes[i];
    if (!n.name.empty()) continue;
    std::string candidate = n.op_type + "_" + std::to_string(i);
    while (used.count(candidate)) candidate += "_";
    used.insert(candidate);
    n.name = candidate;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Writing

Writer WriteTensor(const Tensor& t, const std::string* name) {
  Writer w;
  for (int64_t d : t.shape()) w.Int64Field(tensor_field::kDims, d);
  w.Int64Field(tensor_field::kDataType, OnnxDataType(t.dtype()));
  if (name) w.StringField(tensor_field::kName, *name);
  w.BytesField(tensor_field::kRawData, t.RawBytes());
  return w;
}

Writer WriteGraph(const Graph& g);

Writer WriteAttribute(const std::string& name, const AttributeValue& value) {
  Writer w;
  w.StringField(attr_field::kName, name);
  int64_t type = 0;
  if (const auto* f = std::get_if<float>(&value)) {
    w.FloatField(attr_field::kF, *f);
    type = kAttrFloat;
  } else if (const auto* i = std::get_if<int64_t>(&value)) {
    w.Int64Field(attr_field::kI, *i);
    type = kAttrInt;
  } else if (const auto* s = std::get_if<std::string>(&value)) {
    w.StringField(attr_field::kS, *s);
    type = kAttrString;
  } else if (const auto* t = std::get_if<Tensor>(&value)) {
    w.MessageField(attr_field::kT, WriteTensor(*t, nullptr));
    type = kAttrTensor;
  } else if (const auto* g = std::get_if<GraphPtr>(&value)) {
    w.MessageField(attr_field::kG, WriteGraph(**g));
    type = kAttrGraph;
  } else if (const auto* fs = std::get_if<std::vector<float>>(&value)) {
    for (float f : *fs) w.FloatField(attr_field::kFloats, f);
    type = kAttrFloats;
  } else if (const auto* is = std::get_if<std::vector<int64_t>>(&value)) {
    for (int64_t i : *is) w.Int64Field(attr_field::kInts, i);
    type = kAttrInts;
  }
  w.Int64Field(attr_field::kType, type);
  return w;
}

Writer WriteNode(const Node& n) {
  Writer w;
  for (const std::string& in : n.inputs) w.StringField(node_field::kInput, in);
  for (const std::string& o : n.outputs) w.StringField(node_field::kOutput, o);
  w.StringField(node_field::kName, n.name);
  w.StringField(node_field::kOpType, n.op_type);
  for (const auto& [key, value] : n.attributes) {
    w.MessageField(node_field::kAttribute, WriteAttribute(key, value));
  }
  return w;
}

Writer WriteValueInfo(const ValueInfo& v) {
  Writer shape;
  for (const Dim& d : v.shape) {
    Writer dim;
    if (d.symbolic()) {
      dim.StringField(2, d.param);
    } else {
      dim.Int64Field(1, d.value);
    }
    shape.MessageField(1, dim);
  }
  Writer tensor_type;
  tensor_type.Int64Field(1, OnnxDataType(v.dtype));
  tensor_type.MessageField(2, shape);
  Writer type_proto;
  type_proto.MessageField(1, tensor_type);
  Writer w;
  w.StringField(1, v.name);
  w.MessageField(2, type_proto);
  return w;
}

Writer WriteGraph(const Graph& g) {
  Writer w;
  for (const Node& n : g.nodes) w.MessageField(graph_field::kNode, WriteNode(n));
  w.StringField(graph_field::kName, g.name);
  for (const auto& [name, t] : g.initializers) {
    w.MessageField(graph_field::kInitializer, WriteTensor(t, &name));
  }
  for (const ValueInfo& v : g.inputs) {
    w.MessageField(graph_field::kInput, WriteValueInfo(v));
  }
  for (const std::string& o : g.outputs) {
    Writer vi;
    vi.StringField(1, o);
    w.MessageField(graph_field::kOutput, vi);
  }
  return w;
}

}  // namespace

Graph ParseModel(std::span<const uint8_t> bytes) {
  if (bytes.empty()) {
    throw Error(ErrorCode::kMalformedEncoding, "empty model file");
  }
  Reader r(bytes);
  std::optional<Graph> graph;
  int64_t opset = 0;
  uint32_t field;
  WireType type;
  while (r.NextField(field, type)) {
    switch (field) {
      case model_field::kGraph:
        Expect(type, wire::kLengthDelimited, "graph");
        graph = ReadGraph(r.ReadBytes());
        break;
      case model_field::kOpsetImport: {
        Expect(type, wire::kLengthDelimited, "opset_import");
        Reader op(r.ReadBytes());
        std::string domain;
        int64_t version = 0;
        uint32_t of;
        WireType ot;
        while (op.NextField(of, ot)) {
          if (of == 1) {
            Expect(ot, wire::kLengthDelimited, "opset domain");
            domain = op.ReadString();
          } else if (of == 2) {
            Expect(ot, wire::kVarint, "opset version");
            version = static_cast<int64_t>(op.ReadVarint());
          } else {
            op.Skip(ot);
          }
        }
        if (domain.empty() || domain == "ai.onnx") opset = version;
        break;
      }
      default: r.Skip(type); break;
    }
  }
  if (!graph) throw Error(ErrorCode::kMalformedEncoding, "model has no graph");
  if (opset > 0) graph->opset_version = opset;
  CheckValid(*graph);
  return std::move(*graph);
}

std::vector<uint8_t> SerializeModel(const Graph& graph) {
  CheckValid(graph);
  Writer w;
  w.Int64Field(model_field::kIrVersion, kIrVersionWritten);
  w.StringField(model_field::kProducerName, "graphsentry");
  w.MessageField(model_field::kGraph, WriteGraph(graph));
  Writer opset;
  opset.Int64Field(2, graph.opset_version);
  w.MessageField(model_field::kOpsetImport, opset);
  return w.Take();
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  }
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kIoError, "short write to '" + path.string() + "'");
  }
}

Graph LoadModel(const std::filesystem::path& path) {
  return ParseModel(ReadFileBytes(path));
}

void SaveModel(const std::filesystem::path& path, const Graph& graph) {
  WriteFileBytes(path, SerializeModel(graph));
}

}  // namespace graphsentry
