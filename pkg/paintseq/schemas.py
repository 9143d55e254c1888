"""
File schemas
Pydantic models for every file the command line reads or writes
"""

import json
from datetime import datetime, timezone
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from paintseq import __version__
from paintseq.errors import InstanceFormatError
from paintseq.models import CostRates, ProblemInstance, RepairModel, Vehicle

SCHEMA_VERSION = 1
INDEX_MAP = 'k = (i - 1) * n + (t - 1) for vehicle i at position t'


class VersionedFile(BaseModel):
    schema_version: int = Field(default=SCHEMA_VERSION, description='File format version.')

    @model_validator(mode='after')
    def check_version(self):
        if self.schema_version > SCHEMA_VERSION:
            raise ValueError(
                f'schema_version {self.schema_version} is newer than supported version {SCHEMA_VERSION}'
            )
        return self


# ============================================================================
# INSTANCE FILES
# ============================================================================

class VehicleEntry(BaseModel):
    id: int
    color: str
    style: str
    metadata: dict[str, Any] = Field(default_factory=dict)


class RatesEntry(BaseModel):
    changeover: float = Field(..., description='Currency per color changeover.')
    repair: float = Field(..., description='Currency per paint repair.')


class RepairEntry(BaseModel):
    """p is the repair probability of vehicle `to` painted right after vehicle `from`"""
    model_config = ConfigDict(populate_by_name=True)

    preceding: int = Field(..., alias='from')
    current: int = Field(..., alias='to')
    p: float


class RepairRuleEntry(BaseModel):
    to_color: str
    to_style: str
    from_color: str
    from_style: str
    p: float


class InstanceFile(VersionedFile):
    vehicles: list[VehicleEntry]
    rates: RatesEntry
    repair_probabilities: list[RepairEntry] = Field(default_factory=list)
    repair_rules: list[RepairRuleEntry] = Field(default_factory=list)
    default_repair_probability: Optional[float] = None

    def to_instance(self):
        vehicles = [Vehicle(v.id, v.color, v.style, dict(v.metadata)) for v in self.vehicles]
        explicit = {(e.current, e.preceding): e.p for e in self.repair_probabilities}
        rules = {(r.to_color, r.to_style, r.from_color, r.from_style): r.p for r in self.repair_rules}
        if rules or self.default_repair_probability is not None:
            repair = RepairModel.from_attribute_rules(
                vehicles, rules, default=self.default_repair_probability, overrides=explicit
            )
        else:
            repair = RepairModel(explicit)
        rates = CostRates(self.rates.changeover, self.rates.repair)
        return ProblemInstance.create(vehicles, rates, repair)

    @classmethod
    def from_instance(cls, instance):
        return cls(
            vehicles=[
                VehicleEntry(id=v.id, color=v.color, style=v.style, metadata=dict(v.metadata))
                for v in instance.vehicles
            ],
            rates=RatesEntry(changeover=instance.rates.changeover_rate,
                             repair=instance.rates.repair_rate),
            repair_probabilities=[
                RepairEntry(preceding=j, current=i, p=p)
                for (i, j), p in sorted(instance.repair.table.items())
            ],
        )


def load_instance(path):
    """Read and parse an instance file; structural problems raise InstanceFormatError"""
    try:
        with open(path, 'rb') as handle:
            data = handle.read()
    except OSError as e:
        raise InstanceFormatError(f'cannot read {path}: {e.strerror or e}') from e
    try:
        text = data.decode('utf-8')
    except UnicodeDecodeError as e:
        raise InstanceFormatError(f'{path}: not UTF-8 text ({e.reason} at byte {e.start})') from e
    try:
        return InstanceFile.model_validate_json(text).to_instance()
    except ValidationError as e:
        raise InstanceFormatError(f'{path}: {e.error_count()} schema error(s)\n{e}') from e


# ============================================================================
# RESULT FILES
# ============================================================================

class RunManifest(BaseModel):
    command: str
    instance_path: Optional[str] = None
    fixture: Optional[str] = None
    config: dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    artifact_version: str = __version__
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec='seconds'))


class PlanEntry(BaseModel):
    order: list[int]
    changeover_cost: float
    repair_cost: float
    total_cost: float
    changeover_count: int
    repair_expectation: float

    @classmethod
    def from_plan(cls, plan):
        if plan is None:
            return None
        return cls(
            order=list(plan.order),
            changeover_cost=plan.changeover_cost,
            repair_cost=plan.repair_cost,
            total_cost=plan.total_cost,
            changeover_count=plan.changeover_count,
            repair_expectation=plan.repair_expectation,
        )


class ViolationEntry(BaseModel):
    code: str
    message: str


class ValidationReportFile(VersionedFile):
    manifest: RunManifest
    valid: bool
    violations: list[ViolationEntry] = Field(default_factory=list)


class SequencePlanFile(VersionedFile):
    manifest: RunManifest
    plan: PlanEntry


class QuadraticTerm(BaseModel):
    u: int
    v: int
    coeff: float


class QuboFile(VersionedFile):
    manifest: Optional[RunManifest] = None
    n: int
    penalty: float
    sound_penalty: float
    constant: float
    linear: list[float]
    quadratic: list[QuadraticTerm]
    index_map: str = INDEX_MAP

    @classmethod
    def from_model(cls, model, sound_penalty, manifest=None):
        return cls(
            manifest=manifest,
            n=model.n,
            penalty=model.penalty,
            sound_penalty=sound_penalty,
            constant=model.constant,
            linear=[float(x) for x in model.linear],
            quadratic=[QuadraticTerm(u=u, v=v, coeff=c) for (u, v), c in sorted(model.quadratic.items())],
        )

    def evaluate(self, bits):
        value = self.constant
        for coeff, bit in zip(self.linear, bits):
            value += coeff * float(bit)
        for term in self.quadratic:
            value += term.coeff * (float(bits[term.u]) * float(bits[term.v]))
        return value


class QaoaParamsEntry(BaseModel):
    levels: int
    gammas: list[float]
    betas: list[float]


class SampleEntry(BaseModel):
    bitstring: str
    probability: float
    order: Optional[list[int]] = None


class QaoaResultFile(VersionedFile):
    manifest: RunManifest
    params: QaoaParamsEntry
    expectation: float
    baseline_expectation: float
    trace: list[tuple[int, float]]
    shots: int
    feasible_fraction: float
    top_samples: list[SampleEntry]
    best_feasible: Optional[PlanEntry] = None
    provenance: Optional[str] = None
    exact: Optional[PlanEntry] = None
    matches_exact: Optional[bool] = None


class TippingPointEntry(BaseModel):
    repair_rate: float
    from_changeovers: int
    to_changeovers: int


class SweepSummaryFile(VersionedFile):
    manifest: RunManifest
    rates: list[float]
    csv_path: Optional[str] = None
    tipping_points: list[TippingPointEntry]


def dump_json(document):
    """Stable JSON text: sorted keys, two-space indent, trailing newline"""
    payload = document.model_dump(mode='json', by_alias=True)
    return json.dumps(payload, indent=2, sort_keys=True) + '\n'
