// Copyright 2025 The rbdopt Authors
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

#include "rbd/model.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rbd {

MotionSubspace Joint::subspace(const VecX& q) const {
  MotionSubspace s;
  switch (kind) {
    case JointKind::kRevolute:
      s.columns.resize(6, 1);
      s.columns.col(0) << axis, Vec3::Zero();
      break;
    case JointKind::kPrismatic:
      s.columns.resize(6, 1);
      s.columns.col(0) << Vec3::Zero(), axis;
      break;
    case JointKind::kPlanar: {
      // Coordinates (x, z, theta): translate in the joint-frame x-z plane,
      // then rotate about the joint-frame y axis through the moved origin.
      s.columns.resize(6, 3);
      const Vec3 p(q(0), 0.0, q(1));
      s.columns.col(0) << Vec3::Zero(), Vec3::UnitX();
      s.columns.col(1) << Vec3::Zero(), Vec3::UnitZ();
      s.columns.col(2) << Vec3::UnitY(), p.cross(Vec3::UnitY());
      break;
    }
  }
  return s;
}

PluckerTransform Joint::jointTransform(const VecX& q) const {
  switch (kind) {
    case JointKind::kRevolute:
      return {Eigen::AngleAxisd(q(0), axis.normalized()).toRotationMatrix(), Vec3::Zero()};
    case JointKind::kPrismatic:
      return {Mat3::Identity(), q(0) * axis};
    case JointKind::kPlanar: {
      const Mat3 r = Eigen::AngleAxisd(q(2), Vec3::UnitY()).toRotationMatrix();
      return {r, Vec3(q(0), 0.0, q(1))};
    }
  }
  throw std::logic_error("unknown joint kind");
}

bool KinematicTree::isBodyAncestorOrSelf(int i, int j) const {
  for (int b = j; b >= 0; b = bodies[b].parent) {
    if (b == i) return true;
  }
  return false;
}

bool KinematicTree::dofPrecedesOrEqual(int a, int b) const {
  const int ba = dofBody_[a], bb = dofBody_[b];
  if (ba == bb) return dofColumn(a) <= dofColumn(b);
  return isBodyAncestorOrSelf(ba, bb);
}

int KinematicTree::bodyIndex(const std::string& name) const {
  for (int i = 0; i < numBodies(); ++i) {
    if (bodies[i].name == name) return i;
  }
  return -1;
}

void KinematicTree::finalize() {
  dofOffset_.clear();
  dofBody_.clear();
  nv_ = 0;
  for (int i = 0; i < numBodies(); ++i) {
    if (bodies[i].parent >= i) {
      throw std::runtime_error("model: body '" + bodies[i].name +
                               "' parent must precede it (topological order)");
    }
    if (bodies[i].inertia.mass <= 0.0) {
      throw std::runtime_error("model: body '" + bodies[i].name + "' has nonpositive mass");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(bodies[i].inertia.rotationalInertia);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
      throw std::runtime_error("model: body '" + bodies[i].name +
                               "' rotational inertia not positive definite");
    }
    dofOffset_.push_back(nv_);
    for (int d = 0; d < bodies[i].joint.dof(); ++d) dofBody_.push_back(i);
    nv_ += bodies[i].joint.dof();
  }
  if (actuationSelector.size() == 0) {
    actuationSelector = MatX::Identity(nv_, nv_);
  }
  for (const auto& c : defaultContacts) {
    if (c.body < 0 || c.body >= numBodies()) {
      throw std::runtime_error("model: contact on invalid body index");
    }
  }
}

int totalConstraintDim(const ContactSet& contacts) {
  int n = 0;
  for (const auto& c : contacts) n += c.dim;
  return n;
}

namespace {

[[noreturn]] void parseError(int line, const std::string& msg) {
  throw std::runtime_error("model parse error at line " + std::to_string(line) + ": " + msg);
}

Mat3 rpyRotation(double r, double p, double y) {
  return (Eigen::AngleAxisd(y, Vec3::UnitZ()) * Eigen::AngleAxisd(p, Vec3::UnitY()) *
          Eigen::AngleAxisd(r, Vec3::UnitX()))
      .toRotationMatrix();
}

// Splits "key=a b c" style attributes; values may contain spaces only via
// repeated numeric tokens following the key.
std::map<std::string, std::vector<std::string>> parseAttrs(
    const std::vector<std::string>& tokens, size_t start, int line) {
  std::map<std::string, std::vector<std::string>> attrs;
  std::string current;
  for (size_t i = start; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    auto eq = tok.find('=');
    if (eq != std::string::npos) {
      current = tok.substr(0, eq);
      attrs[current] = {};
      if (eq + 1 < tok.size()) attrs[current].push_back(tok.substr(eq + 1));
    } else if (!current.empty()) {
      attrs[current].push_back(tok);
    } else {
      parseError(line, "unexpected token '" + tok + "'");
    }
  }
  return attrs;
}

std::vector<double> toReals(const std::vector<std::string>& v, size_t count, int line,
                            const std::string& key) {
  if (v.size() != count) {
    parseError(line, "attribute '" + key + "' expects " + std::to_string(count) + " values");
  }
  std::vector<double> out;
  for (const auto& s : v) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(s, &pos));
      if (pos != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      parseError(line, "attribute '" + key + "': bad number '" + s + "'");
    }
  }
  return out;
}

}  // namespace

KinematicTree loadModel(const std::string& text) {
  KinematicTree tree;
  std::vector<std::string> actuatedNames;
  std::istringstream stream(text);
  std::string lineText;
  int lineNo = 0;
  while (std::getline(stream, lineText)) {
    ++lineNo;
    auto hash = lineText.find('#');
    if (hash != std::string::npos) lineText.erase(hash);
    std::istringstream ls(lineText);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;

    if (tokens[0] == "body") {
      if (tokens.size() < 2) parseError(lineNo, "body needs a name");
      Body body;
      body.name = tokens[1];
      if (tree.bodyIndex(body.name) >= 0) parseError(lineNo, "duplicate body '" + body.name + "'");
      auto attrs = parseAttrs(tokens, 2, lineNo);
      auto need = [&](const std::string& key) -> std::vector<std::string>& {
        auto it = attrs.find(key);
        if (it == attrs.end()) parseError(lineNo, "body missing attribute '" + key + "'");
        return it->second;
      };
      const std::string parent = need("parent").at(0);
      if (parent == "world") {
        body.parent = -1;
      } else {
        body.parent = tree.bodyIndex(parent);
        if (body.parent < 0) parseError(lineNo, "unknown parent '" + parent + "'");
      }
      const std::string jointKind = need("joint").at(0);
      if (jointKind == "revolute") {
        body.joint.kind = JointKind::kRevolute;
      } else if (jointKind == "prismatic") {
        body.joint.kind = JointKind::kPrismatic;
      } else if (jointKind == "planar") {
        body.joint.kind = JointKind::kPlanar;
      } else {
        parseError(lineNo, "unknown joint kind '" + jointKind + "'");
      }
      if (body.joint.kind != JointKind::kPlanar) {
        const std::string axis = need("axis").at(0);
        if (axis == "x") body.joint.axis = Vec3::UnitX();
        else if (axis == "y") body.joint.axis = Vec3::UnitY();
        else if (axis == "z") body.joint.axis = Vec3::UnitZ();
        else parseError(lineNo, "axis must be x, y or z");
      }
      const auto xt = toReals(need("xt"), 6, lineNo, "xt");
      body.joint.parentToJoint =
          PluckerTransform(rpyRotation(xt[3], xt[4], xt[5]), Vec3(xt[0], xt[1], xt[2]));
      const double mass = toReals(need("mass"), 1, lineNo, "mass")[0];
      const auto com = toReals(need("com"), 3, lineNo, "com");
      const auto in = toReals(need("inertia"), 6, lineNo, "inertia");
      Mat3 inertiaAtCom;
      inertiaAtCom << in[0], in[3], in[4], in[3], in[1], in[5], in[4], in[5], in[2];
      body.inertia = SpatialInertia::fromComProperties(mass, Vec3(com[0], com[1], com[2]),
                                                       inertiaAtCom);
      tree.bodies.push_back(body);
    } else if (tokens[0] == "gravity") {
      if (tokens.size() != 4) parseError(lineNo, "gravity expects 3 reals");
      tree.gravity = Vec3(std::stod(tokens[1]), std::stod(tokens[2]), std::stod(tokens[3]));
    } else if (tokens[0] == "actuated") {
      for (size_t i = 1; i < tokens.size(); ++i) actuatedNames.push_back(tokens[i]);
    } else if (tokens[0] == "contact") {
      if (tokens.size() != 6) parseError(lineNo, "contact expects: body, 3 reals, dim=<2|3>");
      ContactPoint c;
      c.body = tree.bodyIndex(tokens[1]);
      if (c.body < 0) parseError(lineNo, "unknown contact body '" + tokens[1] + "'");
      c.point = Vec3(std::stod(tokens[2]), std::stod(tokens[3]), std::stod(tokens[4]));
      auto attrs = parseAttrs(tokens, 5, lineNo);
      const auto dim = toReals(attrs["dim"], 1, lineNo, "dim");
      c.dim = static_cast<int>(dim[0]);
      if (c.dim != 2 && c.dim != 3) parseError(lineNo, "contact dim must be 2 or 3");
      tree.defaultContacts.push_back(c);
    } else {
      parseError(lineNo, "unknown directive '" + tokens[0] + "'");
    }
  }

  // Dof tables before selector assembly (needs dof offsets).
  tree.finalize();

  if (!actuatedNames.empty()) {
    MatX selector = MatX::Zero(tree.nv(), static_cast<int>(actuatedNames.size()));
    for (size_t k = 0; k < actuatedNames.size(); ++k) {
      const int body = tree.bodyIndex(actuatedNames[k]);
      if (body < 0) throw std::runtime_error("model: unknown actuated joint '" + actuatedNames[k] + "'");
      if (tree.bodies[body].joint.dof() != 1) {
        throw std::runtime_error("model: actuated directive supports 1-DoF joints only");
      }
      selector(tree.dofOffset(body), static_cast<int>(k)) = 1.0;
    }
    tree.actuationSelector = selector;
  }
  return tree;
}

KinematicTree loadModelFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return loadModel(ss.str());
}

}  // namespace rbd
