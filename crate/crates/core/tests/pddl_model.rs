use std::collections::BTreeSet;

use safeplan_core::fixtures::*;
use safeplan_core::pddl::*;

fn atom(p: &str, args: &[&str]) -> GroundAtom {
    GroundAtom::new(p, args)
}

#[test]
fn blocksworld_domain_has_four_actions() {
    let d = parse_domain(BLOCKSWORLD_DOMAIN).unwrap();
    let names: Vec<&str> = d.actions.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["pick-up", "put-down", "stack", "unstack"]);
}

#[test]
fn empty_input_is_a_syntax_error_at_offset_zero() {
    let err = parse_domain("").unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    assert_eq!(err.pos.offset, 0);
    assert!(parse_problem("   ").is_err());
}

#[test]
fn spanner_tighten_matches_hand_grounding() {
    let d = parse_domain(SPANNER_DOMAIN).unwrap();
    let p = parse_problem(SPANNER_EXAMPLE).unwrap();
    let task = ground_task(&d, &p).unwrap();
    let step = PlanStep::new("tighten_nut", ["gate", "spanner1", "bob", "nut1"]);
    let a = task.lookup(&step).unwrap();
    let text = |ids: &[usize]| {
        ids.iter()
            .map(|&i| task.fluents[i].clone())
            .collect::<BTreeSet<_>>()
    };
    let pre: BTreeSet<(GroundAtom, bool)> = a
        .precondition
        .iter()
        .map(|l| (task.fluents[l.fluent].clone(), l.positive))
        .collect();
    let expected_pre: BTreeSet<(GroundAtom, bool)> = [
        (atom("at", &["bob", "gate"]), true),
        (atom("at", &["nut1", "gate"]), true),
        (atom("carrying", &["bob", "spanner1"]), true),
        (atom("useable", &["spanner1"]), true),
        (atom("loose", &["nut1"]), true),
    ]
    .into_iter()
    .collect();
    assert_eq!(pre, expected_pre);
    assert_eq!(
        text(&a.add),
        [atom("tightened", &["nut1"])].into_iter().collect()
    );
    assert_eq!(
        text(&a.delete),
        [atom("loose", &["nut1"]), atom("useable", &["spanner1"])]
            .into_iter()
            .collect()
    );
}

#[test]
fn unsupported_features_are_named() {
    let durative = "(define (domain d) (:requirements :durative-actions) (:predicates (p)))";
    let err = parse_domain(durative).unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::Unsupported(_)), "{err}");
    let numeric = "(define (domain d) (:predicates (p)) (:functions (fuel)))";
    assert!(matches!(
        parse_domain(numeric).unwrap_err().kind,
        ParseErrorKind::Unsupported(_)
    ));
}

#[test]
fn duplicate_action_is_rejected() {
    let text = "(define (domain d) (:predicates (p))
        (:action a :parameters () :precondition (p) :effect (not (p)))
        (:action a :parameters () :precondition (p) :effect (not (p))))";
    assert!(matches!(
        parse_domain(text).unwrap_err().kind,
        ParseErrorKind::Duplicate { .. }
    ));
}

#[test]
fn blocksworld_constraint_parses_as_sometime_before() {
    let p = parse_problem(BLOCKSWORLD_EXAMPLE).unwrap();
    assert_eq!(p.constraints.len(), 1);
    let c = &p.constraints[0];
    assert_eq!(c.kind(), ConstraintKind::SometimeBefore);
    let bodies: Vec<String> = c.bodies().iter().map(|f| f.to_string()).collect();
    assert_eq!(bodies, ["(on-table b2)", "(on-table b1)"]);
}

#[test]
fn problem_without_constraints_has_none() {
    let text = "(define (problem p) (:domain blocksworld) (:objects b1 - block)
        (:init (on-table b1) (clear b1) (handempty)) (:goal (holding b1)))";
    assert!(parse_problem(text).unwrap().constraints.is_empty());
}

#[test]
fn spanner_constraints_parse() {
    let p = parse_problem(SPANNER_EXAMPLE).unwrap();
    let kinds: Vec<ConstraintKind> = p.constraints.iter().map(|c| c.kind()).collect();
    assert_eq!(
        kinds,
        [ConstraintKind::AlwaysImply, ConstraintKind::AtMostOnce]
    );
    let imply: Vec<String> = p.constraints[0]
        .bodies()
        .iter()
        .map(|f| f.to_string())
        .collect();
    assert_eq!(imply, ["(not (tightened nut1))", "(not (tightened nut2))"]);
    assert_eq!(p.constraints[1].quantifiers, [TypedName::new("m", "man")]);
    assert_eq!(p.constraints[1].bodies()[0].to_string(), "(at ?m shed)");
}

#[test]
fn unknown_constraint_kind_and_unbound_variable() {
    let base = |c: &str| {
        format!(
            "(define (problem p) (:domain blocksworld) (:objects b1 - block)
             (:init (handempty)) (:goal (holding b1)) (:constraints {c}))"
        )
    };
    let err = parse_problem(&base("(sometime (holding b1))")).unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::UnknownConstraintKind(ref k) if k == "sometime"));
    let err = parse_problem(&base("(within 3 (holding b1))")).unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::UnknownConstraintKind(_)));
    let err = parse_problem(&base("(always (clear ?x))")).unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::UnboundVariable(ref v) if v == "x"));
}

#[test]
fn three_block_grounding_counts() {
    let d = parse_domain(BLOCKSWORLD_DOMAIN).unwrap();
    let p = parse_problem(BLOCKSWORLD_SMALL).unwrap();
    let task = ground_task(&d, &p).unwrap();
    let count = |n: &str| task.actions.iter().filter(|a| a.name == n).count();
    assert_eq!(
        [
            count("pick-up"),
            count("put-down"),
            count("stack"),
            count("unstack")
        ],
        [3, 3, 6, 6]
    );
}

#[test]
fn grippers_forall_expands_to_three_monitors() {
    let d = parse_domain(GRIPPERS_DOMAIN).unwrap();
    let p = parse_problem(GRIPPERS_EXAMPLE).unwrap();
    let task = ground_task(&d, &p).unwrap();
    assert_eq!(task.monitors.len(), 3);
    assert!(task
        .monitors
        .iter()
        .all(|m| m.kind() == ConstraintKind::Always));
    let texts: Vec<&str> = task.monitors.iter().map(|m| m.text.as_str()).collect();
    assert_eq!(
        texts,
        [
            "(always (not (carry robot1 ball1 rgripper1)))",
            "(always (not (carry robot1 ball2 rgripper1)))",
            "(always (not (carry robot1 ball3 rgripper1)))",
        ]
    );
}

#[test]
fn domain_mismatch_is_reported() {
    let d = parse_domain(FERRY_DOMAIN).unwrap();
    let p = parse_problem(BLOCKSWORLD_EXAMPLE).unwrap();
    assert!(matches!(
        ground_task(&d, &p),
        Err(GroundError::DomainMismatch { .. })
    ));
}

#[test]
fn ill_typed_init_is_a_type_error() {
    let d = parse_domain(SPANNER_DOMAIN).unwrap();
    let text = SPANNER_EXAMPLE.replace("(useable spanner1)", "(useable bob)");
    let p = parse_problem(&text).unwrap();
    assert!(matches!(ground_task(&d, &p), Err(GroundError::Type(_))));
    let wrong_arity = "(define (problem p) (:domain blocksworld) (:objects b1 - block)
        (:init (on b1)) (:goal (holding b1)))";
    assert!(matches!(
        parse_problem(wrong_arity)
            .map(|p| ground_task(&parse_domain(BLOCKSWORLD_DOMAIN).unwrap(), &p)),
        Ok(Err(GroundError::Type(_)))
    ));
}

#[test]
fn fluents_are_sorted_and_grounding_is_deterministic() {
    for tag in DomainTag::ALL {
        let d = tag.domain();
        let p = parse_problem(tag.example_problem()).unwrap();
        let a = ground_task(&d, &p).unwrap();
        let b = ground_task(&d, &p).unwrap();
        assert!(a.fluents.windows(2).all(|w| w[0] < w[1]), "{tag}");
        assert_eq!(a.fluents, b.fluents);
        assert_eq!(a.actions, b.actions);
        assert_eq!(a.monitors, b.monitors);
        assert!(a.init.true_fluents().all(|f| f < a.fluents.len()));
        assert!(!a.goal.is_empty());
        for act in &a.actions {
            assert!(act.add.iter().all(|f| !act.delete.contains(f)));
        }
    }
}

#[test]
fn print_parse_round_trip() {
    for tag in DomainTag::ALL {
        let d = tag.domain();
        assert_eq!(parse_domain(&d.to_string()).unwrap(), d, "{tag} domain");
        let p = parse_problem(tag.example_problem()).unwrap();
        assert_eq!(parse_problem(&p.to_string()).unwrap(), p, "{tag} problem");
    }
    let p = parse_problem(BLOCKSWORLD_SMALL).unwrap();
    assert_eq!(parse_problem(&p.to_string()).unwrap(), p);
}

#[test]
fn static_pruning_keeps_pruned_actions_resolvable() {
    let d = parse_domain(SPANNER_DOMAIN).unwrap();
    let p = parse_problem(SPANNER_EXAMPLE).unwrap();
    let full = ground_task(&d, &p).unwrap();
    let pruned = ground_task_with(&d, &p, GroundOptions { prune_static: true }).unwrap();
    assert!(pruned.actions.len() < full.actions.len());
    assert_eq!(
        pruned.actions.len() + pruned.pruned_count(),
        full.actions.len()
    );
    assert_eq!(pruned.fluents, full.fluents);
    let walk = PlanStep::new("walk", ["shed", "gate", "bob"]);
    assert!(pruned.lookup(&walk).is_some());
    assert!(pruned.action_id(&walk).is_none());
}

#[test]
fn equality_preconditions_are_static() {
    let d = parse_domain(BLOCKSWORLD_DOMAIN).unwrap();
    let stack = d.action("stack").unwrap();
    assert_eq!(
        failed_equality(stack, &["b1".into(), "b1".into()]).as_deref(),
        Some("(not (= b1 b1))")
    );
    assert_eq!(failed_equality(stack, &["b1".into(), "b2".into()]), None);
}

#[test]
fn type_incompatible_constraint_atom_is_constant_false() {
    let d = parse_domain(SPANNER_DOMAIN).unwrap();
    let mut p = parse_problem(SPANNER_EXAMPLE).unwrap();
    p.constraints = vec![ConstraintSpec::new(ConstraintBody::Always(Formula::not(
        Formula::Atom(Atom::ground("at", &["shed", "gate"])),
    )))];
    let task = ground_task(&d, &p).unwrap();
    assert_eq!(
        task.monitors[0].body,
        GroundConstraintBody::Always(GroundFormula::not(GroundFormula::Const(false)))
    );
}
