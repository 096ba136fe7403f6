//! Per-domain random instances and their constraint templates.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curriculum::SizeParams;
use crate::fixtures::DomainTag;
use crate::pddl::{
    Atom, ConstraintBody, ConstraintSpec, Formula, Literal, ProblemDef, Term, TypedName,
};

fn atom(p: &str, args: &[&str]) -> Atom {
    Atom::ground(p, args)
}

fn names(prefix: &str, range: std::ops::Range<u32>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

fn typed(names: &[String], ty: &str) -> Vec<TypedName> {
    names
        .iter()
        .map(|n| TypedName::new(n.as_str(), ty))
        .collect()
}

/// Stacks as bottom-to-top lists.
fn random_towers(blocks: &[String], rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let mut order = blocks.to_vec();
    order.shuffle(rng);
    let mut towers: Vec<Vec<String>> = Vec::new();
    for b in order {
        match towers.last_mut() {
            Some(t) if rng.gen_bool(0.5) => t.push(b),
            _ => towers.push(vec![b]),
        }
    }
    towers.sort();
    towers
}

fn tower_atoms(towers: &[Vec<String>]) -> Vec<Atom> {
    let mut out = Vec::new();
    for t in towers {
        out.push(atom("on-table", &[&t[0]]));
        for w in t.windows(2) {
            out.push(atom("on", &[&w[1], &w[0]]));
        }
    }
    out
}

fn blocksworld(n: u32, rng: &mut ChaCha8Rng) -> ProblemDef {
    let blocks = names("b", 1..n + 1);
    let init_towers = random_towers(&blocks, rng);
    let goal_towers = loop {
        let g = random_towers(&blocks, rng);
        if g != init_towers {
            break g;
        }
    };
    let mut init = tower_atoms(&init_towers);
    init.extend(
        init_towers
            .iter()
            .map(|t| atom("clear", &[t.last().unwrap()])),
    );
    init.push(atom("handempty", &[] as &[&str]));
    ProblemDef {
        name: String::new(),
        domain_name: "blocksworld".into(),
        objects: typed(&blocks, "block"),
        init,
        goal: tower_atoms(&goal_towers)
            .into_iter()
            .map(Literal::pos)
            .collect(),
        constraints: Vec::new(),
    }
}

fn ferry(l: u32, c: u32, rng: &mut ChaCha8Rng) -> ProblemDef {
    let locs = names("l", 0..l);
    let cars = names("c", 0..c);
    let mut init = vec![
        atom("at-ferry", &[locs.choose(rng).unwrap()]),
        atom("empty-ferry", &[] as &[&str]),
    ];
    let starts: Vec<&String> = cars.iter().map(|_| locs.choose(rng).unwrap()).collect();
    let goals: Vec<&String> = loop {
        let g: Vec<&String> = cars.iter().map(|_| locs.choose(rng).unwrap()).collect();
        if g != starts {
            break g;
        }
    };
    for (car, loc) in cars.iter().zip(&starts) {
        init.push(atom("at", &[car, loc]));
    }
    let mut objects = typed(&locs, "location");
    objects.extend(typed(&cars, "car"));
    ProblemDef {
        name: String::new(),
        domain_name: "ferry".into(),
        objects,
        init,
        goal: cars
            .iter()
            .zip(&goals)
            .map(|(car, loc)| Literal::pos(atom("at", &[car, loc])))
            .collect(),
        constraints: Vec::new(),
    }
}

fn grippers(robots: u32, r: u32, o: u32, rng: &mut ChaCha8Rng) -> ProblemDef {
    let robot_names = names("robot", 1..robots + 1);
    let rooms = names("room", 1..r + 1);
    let balls = names("ball", 1..o + 1);
    let mut grippers = Vec::new();
    let mut init = Vec::new();
    for (i, robot) in robot_names.iter().enumerate() {
        let (right, left) = (format!("rgripper{}", i + 1), format!("lgripper{}", i + 1));
        init.push(atom("at-robby", &[robot, rooms.choose(rng).unwrap()]));
        init.push(atom("free", &[robot, &right]));
        init.push(atom("free", &[robot, &left]));
        grippers.extend([right, left]);
    }
    let starts: Vec<&String> = balls.iter().map(|_| rooms.choose(rng).unwrap()).collect();
    let goals: Vec<&String> = loop {
        let g: Vec<&String> = balls.iter().map(|_| rooms.choose(rng).unwrap()).collect();
        if g != starts {
            break g;
        }
    };
    for (ball, room) in balls.iter().zip(&starts) {
        init.push(atom("at", &[ball, room]));
    }
    let mut objects = typed(&robot_names, "robot");
    objects.extend(typed(&grippers, "gripper"));
    objects.extend(typed(&rooms, "room"));
    objects.extend(typed(&balls, "object"));
    ProblemDef {
        name: String::new(),
        domain_name: "gripper-strips".into(),
        objects,
        init,
        goal: balls
            .iter()
            .zip(&goals)
            .map(|(b, room)| Literal::pos(atom("at", &[b, room])))
            .collect(),
        constraints: Vec::new(),
    }
}

/// `l` counts every location object: the shed, `l - 2` intermediate
/// locations and the gate, linked in both directions along a path.
fn spanner(s: u32, n: u32, l: u32, rng: &mut ChaCha8Rng) -> ProblemDef {
    let mut locs = vec!["shed".to_string()];
    locs.extend(names("location", 1..l.saturating_sub(1)));
    locs.push("gate".into());
    let spanners = names("spanner", 1..s + 1);
    let nuts = names("nut", 1..n + 1);
    let mut init = vec![atom("at", &["bob", "shed"])];
    let not_gate = &locs[..locs.len() - 1];
    for sp in &spanners {
        init.push(atom("at", &[sp, not_gate.choose(rng).unwrap()]));
        init.push(atom("useable", &[sp]));
    }
    let beyond_shed = &locs[1..];
    for nut in &nuts {
        init.push(atom("at", &[nut, beyond_shed.choose(rng).unwrap()]));
        init.push(atom("loose", &[nut]));
    }
    for w in locs.windows(2) {
        init.push(atom("link", &[&w[0], &w[1]]));
        init.push(atom("link", &[&w[1], &w[0]]));
    }
    let mut objects = vec![TypedName::new("bob", "man")];
    objects.extend(typed(&spanners, "spanner"));
    objects.extend(typed(&nuts, "nut"));
    objects.extend(typed(&locs, "location"));
    ProblemDef {
        name: String::new(),
        domain_name: "spanner".into(),
        objects,
        init,
        goal: nuts
            .iter()
            .map(|nut| Literal::pos(atom("tightened", &[nut])))
            .collect(),
        constraints: Vec::new(),
    }
}

/// A fresh, unconstrained instance. Deterministic in `(size, seed)`.
pub(crate) fn instance(size: &SizeParams, seed: u64) -> ProblemDef {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *size {
        SizeParams::Blocksworld { n } => blocksworld(n, &mut rng),
        SizeParams::Ferry { l, c } => ferry(l, c, &mut rng),
        SizeParams::Grippers { n, r, o } => grippers(n, r, o, &mut rng),
        SizeParams::Spanner { s, n, l } => spanner(s, n, l, &mut rng),
    }
}

fn goal_args<'p>(problem: &'p ProblemDef, predicate: &str) -> Vec<&'p [crate::pddl::Term]> {
    problem
        .goal
        .iter()
        .filter(|l| l.positive && l.atom.predicate == predicate)
        .map(|l| l.atom.args.as_slice())
        .collect()
}

fn holds_initially(problem: &ProblemDef, a: &Atom) -> bool {
    problem.init.contains(a)
}

fn blocks_beneath<'p>(problem: &'p ProblemDef, block: &str) -> Vec<&'p String> {
    let mut out = Vec::new();
    let mut cur = block.to_string();
    while let Some(a) = problem
        .init
        .iter()
        .find(|a| a.predicate == "on" && a.args[0].to_string() == cur)
    {
        let Term::Object(below) = &a.args[1] else {
            break;
        };
        out.push(below);
        cur = below.clone();
    }
    out
}

/// A uniform choice from the first non-empty tier.
fn pick<'a>(rng: &mut ChaCha8Rng, tiers: &[Vec<&'a String>]) -> &'a String {
    let tier = tiers
        .iter()
        .find(|t| !t.is_empty())
        .expect("at least two blocks");
    tier.choose(rng).unwrap()
}

fn on_table(b: &str) -> Formula {
    Formula::Atom(atom("on-table", &[b]))
}

pub(crate) fn constraints_for(
    problem: &ProblemDef,
    domain: DomainTag,
    seed: u64,
) -> Vec<ConstraintSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objects_of = |ty: &str| -> Vec<String> {
        problem
            .objects
            .iter()
            .filter(|o| o.ty == ty)
            .map(|o| o.name.clone())
            .collect()
    };
    match domain {
        DomainTag::Blocksworld => {
            // The trigger must start off the table, or the constraint fails in
            // the initial state; ideally it also has to reach the table. The
            // requirement block should start off the table too, so the order
            // binds, and not lie beneath the trigger, so it can get there first.
            let blocks = objects_of("block");
            let starts_off = |b: &String| !holds_initially(problem, &atom("on-table", &[b]));
            let goal_on_table: Vec<String> = goal_args(problem, "on-table")
                .iter()
                .map(|a| a[0].to_string())
                .collect();
            let x = pick(
                &mut rng,
                &[
                    blocks
                        .iter()
                        .filter(|b| starts_off(b) && goal_on_table.contains(b))
                        .collect(),
                    blocks.iter().filter(|b| starts_off(b)).collect(),
                    blocks.iter().collect(),
                ],
            );
            let beneath = blocks_beneath(problem, x);
            let y = pick(
                &mut rng,
                &[
                    blocks
                        .iter()
                        .filter(|b| *b != x && starts_off(b) && !beneath.contains(b))
                        .collect(),
                    blocks
                        .iter()
                        .filter(|b| *b != x && !beneath.contains(b))
                        .collect(),
                    blocks.iter().filter(|b| *b != x).collect(),
                ],
            );
            vec![ConstraintSpec::new(ConstraintBody::SometimeBefore {
                trigger: on_table(x),
                requirement: on_table(y),
            })]
        }
        DomainTag::Ferry => {
            let locs = objects_of("location");
            let mut out = Vec::new();
            for lit in &problem.goal {
                if holds_initially(problem, &lit.atom) {
                    continue;
                }
                let (car, dest) = (lit.atom.args[0].to_string(), lit.atom.args[1].to_string());
                let waypoint = locs
                    .iter()
                    .filter(|l| **l != dest)
                    .collect::<Vec<_>>()
                    .choose(&mut rng)
                    .copied()
                    .cloned();
                if let Some(k) = waypoint {
                    out.push(ConstraintSpec::new(ConstraintBody::SometimeBefore {
                        trigger: Formula::Atom(atom("at", &[&car, &dest])),
                        requirement: Formula::Atom(atom("at-ferry", &[&k])),
                    }));
                }
            }
            out
        }
        DomainTag::Grippers => {
            let gripper = if rng.gen_bool(0.5) {
                "rgripper1"
            } else {
                "lgripper1"
            };
            let body = Formula::Forall(
                vec![TypedName::new("b", "object")],
                Box::new(Formula::not(Formula::Atom(Atom::new(
                    "carry",
                    vec![
                        Term::Object("robot1".into()),
                        Term::Var("b".into()),
                        Term::Object(gripper.into()),
                    ],
                )))),
            );
            vec![ConstraintSpec::new(ConstraintBody::Always(body))]
        }
        DomainTag::Spanner => {
            let mut nuts = objects_of("nut");
            nuts.shuffle(&mut rng);
            let mut out: Vec<ConstraintSpec> = nuts
                .windows(2)
                .map(|w| {
                    let t = |n: &str| Formula::not(Formula::Atom(atom("tightened", &[n])));
                    ConstraintSpec::new(ConstraintBody::AlwaysImply {
                        antecedent: t(&w[0]),
                        consequent: t(&w[1]),
                    })
                })
                .collect();
            out.push(ConstraintSpec {
                quantifiers: vec![TypedName::new("m", "man")],
                body: ConstraintBody::AtMostOnce(Formula::Atom(Atom::new(
                    "at",
                    vec![Term::Var("m".into()), Term::Object("shed".into())],
                ))),
            });
            out
        }
    }
}
