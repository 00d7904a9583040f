import json

import pytest
from conftest import build_merge_session, load_annotations, _quick_model

from procompare.errors import (
    MergeConflict,
    NoMatrix,
    PlanError,
    UnaccountedProcesses,
    UnknownEntity,
)
from procompare.reference import (
    Accept,
    Annotation,
    CommonGroup,
    Reassign,
    VariationReason,
    accounting,
    build_reference_model,
    decide,
    parse_reference_document,
    plan_from_data,
    plan_to_data,
    propose_plan,
    serialize_reference_model,
)
from procompare.session import create_session, establish_fact, recompute, retract_fact

EXPECTED_REASONS = (
    VariationReason(
        "Application domain", "Application type", "Information system", "Computation intensive system"
    ),
    VariationReason("Application domain", "Main asset", "Usability", "Performance"),
    VariationReason("Development characteristics", "Process maturity", "Low", "Medium"),
    VariationReason("Development characteristics", "Team size", "5", "9"),
    VariationReason("Organization", "Customer involvement", "High", "Low"),
)


def small_session(left_procs, right_procs, facts=()):
    left = _quick_model("l", left_procs)
    right = _quick_model("r", right_procs)
    session = create_session(left, right, session_id="small")
    for lid, rid, verdict in facts:
        establish_fact(session, "process", lid, rid, verdict)
    recompute(session, "phases")
    return session


class TestProposal:
    def test_classification(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        commons = {(g.left_id, g.right_id) for g in plan.common_groups}
        assert len(commons) == 9
        assert ("p1-dev", "p2-code") in commons
        assert ("p1-accept", "p2-accept") in commons

        assert [g.id for g in plan.alternative_groups] == ["alt-integration"]
        group = plan.alternative_groups[0]
        assert group.left_members == ("p1-integ",)
        assert group.right_members == ("p2-integrate",)
        assert group.purpose == "integration"

        optionals = {(c.process_id, c.reason) for c in plan.optional_candidates}
        assert optionals == {
            ("p1-doc", "no-counterpart"),
            ("p2-plan", "no-counterpart"),
            ("p2-frame", "no-counterpart"),
        }
        assert len(plan.exclusions) == 7
        assert not plan.final

    def test_left_name_wins_in_common_groups(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        names = {g.left_id: g.name for g in plan.common_groups}
        assert names["p1-dev"] == "Development phase"  # not "Coding phase"

    def test_deterministic(self, merge_session, merge_annotations):
        assert propose_plan(merge_session, merge_annotations) == propose_plan(
            merge_session, merge_annotations
        )

    def test_requires_an_iteration(self, pilot_one, pilot_two):
        session = create_session(pilot_one, pilot_two)
        with pytest.raises(NoMatrix):
            propose_plan(session)

    def test_duplicate_annotation_rejected(self, merge_session):
        notes = [
            Annotation("p1-doc", "left", exclude=True),
            Annotation("p1-doc", "left", skipped_but_important=True),
        ]
        with pytest.raises(PlanError):
            propose_plan(merge_session, notes)

    def test_unknown_annotation_target(self, merge_session):
        with pytest.raises(UnknownEntity):
            propose_plan(merge_session, [Annotation("p9-ghost", "left")])

    def test_ambiguous_annotation_needs_source(self):
        session = small_session({"p": {}, "q": {}}, {"p": {}})
        with pytest.raises(PlanError):
            propose_plan(session, [Annotation("p", None, exclude=True)])
        plan = propose_plan(session, [Annotation("p", "left", exclude=True)])
        assert [(e.process_id, e.source) for e in plan.exclusions] == [("p", "left")]

    def test_many_to_many_equal_facts_resolve_greedily(self):
        session = small_session(
            {"a1": {}, "a2": {}},
            {"b1": {}, "b2": {}},
            facts=[("a1", "b1", "equal"), ("a1", "b2", "equal"), ("a2", "b1", "equal")],
        )
        plan = propose_plan(session)
        assert [(g.left_id, g.right_id) for g in plan.common_groups] == [("a1", "b1")]
        # the losers stay unplanned rather than silently doubling up
        assert "a2" not in plan.assignments("left")

    def test_exclusion_beats_optional(self, merge_session):
        # p1-doc is exhausted, but an explicit exclusion wins.
        plan = propose_plan(merge_session, [Annotation("p1-doc", "left", exclude=True)])
        assert all(c.process_id != "p1-doc" for c in plan.optional_candidates)
        assert any(e.process_id == "p1-doc" for e in plan.exclusions)


class TestDecide:
    def test_accept_marks_final(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        decide(plan, Accept())
        assert plan.final

    def test_reassign_reopens_the_plan(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        decide(plan, Accept())
        decide(plan, Reassign("p1-doc", to="excluded", reason="out of scope"))
        assert not plan.final
        assert any(e.process_id == "p1-doc" for e in plan.exclusions)
        assert all(c.process_id != "p1-doc" for c in plan.optional_candidates)

    def test_reassign_into_nested_alternative(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        decide(plan, Reassign("p1-doc", to="alternative", group_id="alt-integration", nested=True))
        candidate = next(c for c in plan.optional_candidates if c.process_id == "p1-doc")
        assert candidate.nested_in == "alt-integration"

    def test_common_requires_recorded_equal_fact(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        with pytest.raises(PlanError):
            decide(plan, Reassign("p1-doc", to="common", counterpart="p2-plan"))

    def test_common_requires_free_counterpart(self):
        session = small_session(
            {"a1": {}, "a2": {}},
            {"b1": {}},
            facts=[("a1", "b1", "equal"), ("a2", "b1", "equal")],
        )
        plan = propose_plan(session)
        with pytest.raises(PlanError):
            decide(plan, Reassign("a2", to="common", counterpart="b1"))

    def test_excluding_a_common_member_frees_its_counterpart(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        decide(plan, Reassign("p1-elicit", to="excluded"))
        assert "p2-gather" not in plan.assignments("right")
        decide(plan, Reassign("p1-elicit", to="common", counterpart="p2-gather"))
        assert plan.assignments("right")["p2-gather"] == "common"

    def test_unknown_group_rejected(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        with pytest.raises(PlanError):
            decide(plan, Reassign("p1-doc", to="alternative", group_id="alt-nope"))

    def test_unknown_process_rejected(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        with pytest.raises(UnknownEntity):
            decide(plan, Reassign("p9-ghost", to="excluded"))

    def test_unknown_classification_rejected(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        with pytest.raises(PlanError):
            decide(plan, Reassign("p1-doc", to="mandatory"))

    def test_optional_reason_is_validated(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        with pytest.raises(PlanError):
            decide(plan, Reassign("p1-doc", to="optional", reason="felt like it"))

    def test_plan_round_trips_through_data(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        decide(plan, Reassign("p1-doc", to="alternative", group_id="alt-integration", nested=True))
        payload = json.loads(json.dumps(plan_to_data(plan)))
        assert plan_from_data(payload) == plan


class TestBuild:
    def build(self, session, annotations, *decisions):
        plan = propose_plan(session, annotations)
        for decision in decisions:
            decide(plan, decision)
        decide(plan, Accept())
        return build_reference_model(session, plan)

    def test_plan_must_be_final(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        with pytest.raises(PlanError):
            build_reference_model(merge_session, plan)

    def test_totality_accounting(self, merge_session, merge_annotations):
        ref = self.build(merge_session, merge_annotations)
        assert accounting(ref) == {
            "left_processes": 14,
            "right_processes": 16,
            "common_pairs": 9,
            "box_members": 5,
            "exclusions": 7,
            "balanced": True,
        }

    def test_merged_hierarchy(self, merge_session, merge_annotations):
        ref = self.build(merge_session, merge_annotations)
        base = ref.base
        assert base.root_processes == ("p1-req", "p1-design", "p1-dev", "p1-test")
        assert base.process("p1-test").sub_processes == (
            "p1-integ",
            "p1-accept",
            "p2-plan",
            "p2-frame",
        )
        assert base.process("p1-dev").sub_processes == ("p1-doc", "p2-integrate")
        # excluded processes leave no trace in the merged model
        assert "p1-approve" not in base.processes
        assert "p2-client" not in base.processes

    def test_products_merge_through_facts(self, merge_session, merge_annotations):
        ref = self.build(merge_session, merge_annotations)
        products = ref.base.products
        assert len(products) == 17  # 10 left + 7 right without an equal fact
        assert "pd2-needs" not in products  # absorbed into pd1-wishes
        assert "pd2-archdoc" in products
        accesses = {(a.product_id, a.mode) for a in ref.base.process("p1-req").product_accesses}
        assert accesses == {
            ("pd1-wishes", "consume"),
            ("pd1-reqdoc", "produce"),
            ("pd1-usecases", "produce"),
        }

    def test_provenance_tracks_both_sources(self, merge_session, merge_annotations):
        ref = self.build(merge_session, merge_annotations)
        record = ref.provenance["processes"]["p1-req"]
        assert record["left"]["id"] == "p1-req"
        assert record["right"]["id"] == "p2-req"
        assert record["right"]["name"] == "Requirements phase"
        wishes = ref.provenance["products"]["pd1-wishes"]
        assert wishes["right"]["id"] == "pd2-needs"

    def test_variation_boxes(self, merge_session, merge_annotations):
        ref = self.build(merge_session, merge_annotations)
        assert [b.id for b in ref.boxes] == [
            "alt-integration-a",
            "alt-integration-b",
            "opt-p1-doc",
            "opt-p2-frame",
            "opt-p2-plan",
        ]
        alt_a, alt_b = ref.boxes[0], ref.boxes[1]
        assert alt_a.kind == alt_b.kind == "ALT"
        assert alt_a.member_process_ids == ("p1-integ",)
        assert alt_b.member_process_ids == ("p2-integrate",)
        assert alt_a.purpose == alt_b.purpose == "integration"
        assert alt_a.variation_reasons == EXPECTED_REASONS
        opt = ref.boxes[2]
        assert opt.kind == "OPT" and opt.variation_reasons == EXPECTED_REASONS

    def test_shared_context_never_becomes_a_reason(self, merge_session, merge_annotations):
        ref = self.build(merge_session, merge_annotations)
        for box in ref.boxes:
            assert all(r.characteristic != "Transport protocol" for r in box.variation_reasons)

    def test_nested_optional_inside_alternative(self, merge_session, merge_annotations):
        ref = self.build(
            merge_session,
            merge_annotations,
            Reassign("p1-doc", to="alternative", group_id="alt-integration", nested=True),
        )
        assert [b.id for b in ref.boxes] == [
            "alt-integration-a",
            "alt-integration-b",
            "opt-p2-frame",
            "opt-p2-plan",
        ]
        alt_a = ref.boxes[0]
        assert [n.id for n in alt_a.nested_boxes] == ["opt-p1-doc"]
        assert alt_a.nested_boxes[0].variation_reasons == ()  # reasons live on the outer box
        assert accounting(ref)["balanced"]

    def test_unaccounted_processes_are_listed(self, merge_session):
        plan = propose_plan(merge_session)  # no annotations: exclusions missing
        decide(plan, Accept())
        with pytest.raises(UnaccountedProcesses) as err:
            build_reference_model(merge_session, plan)
        message = str(err.value)
        assert "left:p1-approve" in message
        assert "right:p2-client" in message

    def test_overlapping_commons_conflict(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        plan.common_groups.append(CommonGroup("p1-elicit", "p2-analyze", "", "f-0"))
        plan.final = True
        with pytest.raises(MergeConflict):
            build_reference_model(merge_session, plan)

    def test_retracted_equal_fact_blocks_build(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        fact_id = plan.equal_facts[("p1-elicit", "p2-gather")]
        retract_fact(merge_session, fact_id)
        decide(plan, Accept())
        with pytest.raises(PlanError):
            build_reference_model(merge_session, plan)

    def test_emptied_alternative_side_blocks_build(self, merge_session, merge_annotations):
        with pytest.raises(PlanError):
            self.build(
                merge_session,
                merge_annotations,
                Reassign("p2-integrate", to="excluded", reason="dropped"),
            )

    def test_plan_bound_to_its_models(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        decide(plan, Accept())
        other = small_session({"a": {}}, {"b": {}})
        with pytest.raises(PlanError):
            build_reference_model(other, plan)

    def test_colliding_variation_ids_get_namespaced(self):
        session = small_session({"shared": {"name": "alpha only"}}, {"shared": {"name": "beta only"}})
        notes = [
            Annotation("shared", "left", skipped_but_important=True),
            Annotation("shared", "right", skipped_but_important=True),
        ]
        ref = self.build(session, notes)
        assert "shared" in ref.base.processes
        assert "r:shared" in ref.base.processes
        assert ref.provenance["processes"]["r:shared"]["right"]["id"] == "shared"

    def test_empty_models_build_an_empty_reference(self):
        session = small_session({}, {})
        ref = self.build(session, None)
        assert ref.base.processes == {}
        assert ref.boxes == ()
        assert accounting(ref)["balanced"]
        assert parse_reference_document(serialize_reference_model(ref)) == ref


class TestReferenceDocument:
    def test_round_trip(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        decide(plan, Reassign("p1-doc", to="alternative", group_id="alt-integration", nested=True))
        decide(plan, Accept())
        ref = build_reference_model(merge_session, plan)
        text = serialize_reference_model(ref)
        again = parse_reference_document(text)
        assert again == ref
        assert serialize_reference_model(again) == text

    def test_parse_rejects_bad_json(self):
        from procompare.errors import ParseError

        with pytest.raises(ParseError):
            parse_reference_document("{not json")

    def test_parse_rejects_unknown_box_kind(self, merge_session, merge_annotations):
        plan = propose_plan(merge_session, merge_annotations)
        decide(plan, Accept())
        ref = build_reference_model(merge_session, plan)
        data = json.loads(serialize_reference_model(ref))
        data["boxes"][0]["kind"] = "XOR"
        from procompare.errors import ParseError

        with pytest.raises(ParseError):
            parse_reference_document(json.dumps(data))
