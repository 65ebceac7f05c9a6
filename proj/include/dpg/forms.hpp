#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dpg/basis.hpp"
#include "dpg/mesh.hpp"
#include "dpg/space.hpp"

namespace dpg {

/// A vector-valued function of the physical point.
using Field = std::function<VectorXc(const Vec3&)>;

/// Volume operator applied to a slot: its value or its exterior derivative.
enum class Op { Value, D };
/// Facet operator: value, normal component (n . v) or tangential rotation (n x v).
enum class TraceOp { Value, NormalDot, NCross };

/// coef * op(slot); coef maps the operator's components to the expression's.
struct Term {
    int slot = 0;
    Op op = Op::Value;
    MatrixXc coef;
};
using Expr = std::vector<Term>;

/// integral of left(trial) . conj(right(test)).
struct Pairing {
    Expr left;
    Expr right;
};

/// coef * <trace_op(interface slot), trace_op(test slot)> on every cell boundary.
struct BoundaryPairing {
    int trial_slot = 0;
    TraceOp trial_op = TraceOp::Value;
    int test_slot = 0;
    TraceOp test_op = TraceOp::Value;
    cplx coef = 1.0;
};

/// integral of f . conj(test expression).
struct LoadTerm {
    Field f;
    Expr test;
};

enum class SlotKind { Field, Interface };
enum class SpaceMode { Guaranteed, Economy };

std::string space_mode_name(SpaceMode m);
SpaceMode parse_space_mode(const std::string& s);

struct TrialSlot {
    std::string name;
    Family family;
    int degree;
    SlotKind kind;
    bool zero_bc;
    std::string exact;    ///< manufactured field giving the slot's exact value
    std::string exact_d;  ///< and its exterior derivative (empty for L2 and interfaces)
    double exact_sign = 1.0;
};

struct TestSlot {
    std::string name;
    Family family;
    int degree;
    bool conforming_zero_bc;  ///< boundary condition of the conforming subspace
};

/// Constant coefficients: diffusion alpha = a^{-1}, convection beta, reaction gamma;
/// Maxwell permittivity eps, permeability mu, wavenumber omega.
struct Coefficients {
    MatrixXd alpha;
    VectorXd beta;
    double gamma = 0.0;
    double eps = 1.0, mu = 1.0, omega = 1.0;
};

struct ManufacturedCase {
    std::string name;
    int dim = 2;
    Domain domain = Domain::UnitSquare;
    bool has_exact = false;
    Coefficients coef;
    std::map<std::string, Field> fields;
    /// Expected convergence rates by slot name, for the default formulation at degree p.
    std::function<double(const std::string& slot, int p)> expected_rate;

    const Field& field(const std::string& key) const;
};

struct Formulation {
    std::string id;
    int dim = 2;
    int p = 1;
    int delta = 3;
    SpaceMode mode = SpaceMode::Guaranteed;
    bool complex_valued = false;
    bool graph_norm = false;
    Coefficients coef;
    std::vector<TrialSlot> trial;  ///< field slots first, then interface slots
    std::vector<TestSlot> test;
    std::vector<Pairing> b0;
    std::vector<BoundaryPairing> bhat;
    std::vector<Pairing> ygram;
    std::function<std::vector<LoadTerm>(const ManufacturedCase&)> load_builder;

    int num_fields() const;
    int num_interfaces() const;
    std::vector<LoadTerm> loads(const ManufacturedCase& mc) const { return load_builder(mc); }
    std::shared_ptr<const ReferenceSpace> trial_space(int slot) const;
    std::shared_ptr<const ReferenceSpace> test_space(int slot) const;
};

const std::vector<std::string>& formulation_ids();
bool is_maxwell(const std::string& id);

/// Builds a catalog entry. Coefficients default to those of the formulation's
/// standard manufactured case.
Formulation make_formulation(const std::string& id, int p, int delta, SpaceMode mode = SpaceMode::Guaranteed,
                             const Coefficients* coef = nullptr, int dim = 0);

/// Default test enrichment: 3 in guaranteed mode, 2 in economy mode.
int default_delta(SpaceMode mode);

ManufacturedCase manufactured_case(const std::string& name);
const std::vector<std::string>& case_names();
/// The manufactured case matching a formulation's PDE family.
std::string default_case(const std::string& formulation_id);

/// Global dof layouts of a formulation's trial slots on a mesh.
struct TrialLayout {
    std::vector<DofLayout> slots;
    std::vector<int> offset;  ///< first global id of each slot
    int ndofs = 0;
};
TrialLayout make_trial_layout(const Formulation& f, const MeshEntities& ents);

/// Global dofs fixed to zero by essential boundary conditions, ascending.
std::vector<int> bc_constraints(const Formulation& f, const TrialLayout& layout);

/// Dof layouts of the conforming test subspace (one per test slot).
std::vector<DofLayout> conforming_test_layouts(const Formulation& f, const MeshEntities& ents);

}  // namespace dpg
