//! Random problem samplers, one per shipped domain. Each takes a size knob; larger sizes give
//! more objects and, on average, longer plans.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::pddl::{Atom, Literal, Problem, TypedName};

pub(crate) type Sampler = fn(usize, &mut ChaCha8Rng) -> Problem;

/// Sampler and largest useful size for a base domain.
pub(crate) fn sampler(domain: &str) -> Option<(Sampler, usize)> {
    Some(match domain {
        "barman" => (barman, 12),
        "blocksworld" => (blocksworld, 14),
        "childsnack" => (childsnack, 16),
        "depots" => (depots, 14),
        "driverlog" => (driverlog, 14),
        "grippers" => (grippers, 16),
        "hanoi" => (hanoi, 6),
        "logistics" => (logistics, 16),
        "satellite" => (satellite, 16),
        "storage" => (storage, 12),
        _ => return None,
    })
}

/// Rough size to start from when aiming at plans of about `len` steps.
pub(crate) fn size_hint(domain: &str, len: usize) -> usize {
    let per = match domain {
        "blocksworld" => 2,
        "hanoi" => 5,
        "barman" => 3,
        _ => 3,
    };
    (len / per).max(1)
}

pub(crate) const COLOURS: [&str; 16] =
    ["red", "blue", "orange", "yellow", "white", "magenta", "black", "cyan", "green", "violet", "silver", "gold", "brown", "pink", "grey", "teal"];

const MODES: [&str; 5] = ["thermograph", "spectrograph", "infrared", "image", "xray"];

#[derive(Default)]
struct Builder {
    objects: Vec<TypedName>,
    init: Vec<Atom>,
    goal: Vec<Literal>,
}

impl Builder {
    fn obj(&mut self, name: impl Into<String>, ty: &str) -> String {
        let name = name.into();
        self.objects.push(TypedName::new(name.clone(), ty));
        name
    }

    fn objs(&mut self, prefix: &str, n: usize, ty: &str) -> Vec<String> {
        (1..=n).map(|i| self.obj(format!("{prefix}{i}"), ty)).collect()
    }

    fn init(&mut self, pred: &str, args: &[&str]) {
        let a = Atom::new(pred, args.iter().copied());
        if !self.init.contains(&a) {
            self.init.push(a);
        }
    }

    fn goal(&mut self, pred: &str, args: &[&str]) {
        let l = Literal::pos(Atom::new(pred, args.iter().copied()));
        if !self.goal.contains(&l) {
            self.goal.push(l);
        }
    }

    fn finish(self, domain: &str) -> Problem {
        Problem { name: format!("{domain}-gen"), domain_name: domain.to_string(), objects: self.objects, init: self.init, goal: self.goal }
    }
}

/// Random partition of `items` into ordered stacks (bottom first).
fn random_stacks<T: Clone>(items: &[T], max_stacks: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let mut shuffled = items.to_vec();
    shuffled.shuffle(rng);
    let k = rng.gen_range(1..=max_stacks.clamp(1, items.len().max(1)));
    let mut stacks = vec![Vec::new(); k];
    for (i, it) in shuffled.into_iter().enumerate() {
        // every stack gets one item first, the rest land anywhere
        let s = if i < k { i } else { rng.gen_range(0..k) };
        stacks[s].push(it);
    }
    stacks
}

/// Keeps each goal literal with probability `p`, but at least one.
fn thin_goal(b: &mut Builder, p: f64, rng: &mut ChaCha8Rng) {
    if b.goal.len() <= 1 {
        return;
    }
    let keep: Vec<bool> = b.goal.iter().map(|_| rng.gen_bool(p)).collect();
    if keep.iter().any(|k| *k) {
        let mut it = keep.into_iter();
        b.goal.retain(|_| it.next().unwrap());
    } else {
        let i = rng.gen_range(0..b.goal.len());
        let g = b.goal.swap_remove(i);
        b.goal = vec![g];
    }
}

fn blocksworld(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let n = (s + 2).min(COLOURS.len());
    let mut names: Vec<&str> = COLOURS.choose_multiple(rng, n).copied().collect();
    names.sort_unstable();
    let mut b = Builder::default();
    for n in &names {
        b.obj(*n, "block");
    }
    for stack in random_stacks(&names, n, rng) {
        b.init("on-table", &[stack[0]]);
        for w in stack.windows(2) {
            b.init("on-top-of", &[w[1], w[0]]);
        }
        b.init("clear", &[stack[stack.len() - 1]]);
    }
    b.init("hand-empty", &[]);
    loop {
        let target = random_stacks(&names, n.div_ceil(2), rng);
        for stack in &target {
            for w in stack.windows(2) {
                b.goal("on-top-of", &[w[1], w[0]]);
            }
        }
        if !b.goal.is_empty() {
            break;
        }
    }
    thin_goal(&mut b, 0.85, rng);
    b.finish("blocksworld")
}

fn logistics(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let cities = 2 + s / 4;
    let per_city = 2 + usize::from(s >= 8);
    let packages = 1 + s / 2;
    let airplanes = 1 + s / 10;
    let mut b = Builder::default();
    let mut locs: Vec<(String, usize)> = Vec::new();
    let mut airports = Vec::new();
    for c in 1..=cities {
        let city = b.obj(format!("c{c}"), "city");
        for j in 1..=per_city {
            let name = format!("l{c}-{j}");
            let l = b.obj(name.clone(), if j == 1 { "airport" } else { "location" });
            b.init("in-city", &[&l, &city]);
            if j == 1 {
                airports.push(l.clone());
            }
            locs.push((l, c));
        }
    }
    for c in 1..=cities {
        let t = b.obj(format!("t{c}"), "truck");
        let in_city: Vec<&String> = locs.iter().filter(|(_, cc)| *cc == c).map(|(l, _)| l).collect();
        let at = in_city.choose(rng).unwrap().to_string();
        b.init("at", &[&t, &at]);
    }
    for a in b.objs("a", airplanes, "airplane") {
        let at = airports.choose(rng).unwrap().clone();
        b.init("at", &[&a, &at]);
    }
    for p in b.objs("p", packages, "package") {
        let from = locs.choose(rng).unwrap().0.clone();
        let to = loop {
            let t = &locs.choose(rng).unwrap().0;
            if *t != from {
                break t.clone();
            }
        };
        b.init("at", &[&p, &from]);
        b.goal("at", &[&p, &to]);
    }
    b.finish("logistics")
}

fn driverlog(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let n_loc = 2 + s / 3;
    let drivers = 1 + s / 6;
    let trucks = 1 + s / 7;
    let packages = 1 + s / 3;
    let mut b = Builder::default();
    let locs: Vec<String> = (0..n_loc).map(|i| b.obj(format!("s{i}"), "location")).collect();
    // spanning tree plus a few extra roads
    let mut edges: Vec<(usize, usize)> = (1..n_loc).map(|i| (rng.gen_range(0..i), i)).collect();
    for _ in 0..n_loc / 3 {
        let (x, y) = (rng.gen_range(0..n_loc), rng.gen_range(0..n_loc));
        if x != y && !edges.contains(&(x.min(y), x.max(y))) {
            edges.push((x.min(y), x.max(y)));
        }
    }
    edges.sort_unstable();
    for &(x, y) in &edges {
        let (lx, ly) = (locs[x].clone(), locs[y].clone());
        b.init("link", &[&lx, &ly]);
        b.init("link", &[&ly, &lx]);
        let p = b.obj(format!("p{x}-{y}"), "location");
        for (u, v) in [(&lx, &p), (&p, &lx), (&ly, &p), (&p, &ly)] {
            b.init("path", &[u, v]);
        }
    }
    let ds = b.objs("driver", drivers, "driver");
    let ts = b.objs("truck", trucks, "truck");
    let ps = b.objs("package", packages, "obj");
    for d in &ds {
        let at = locs.choose(rng).unwrap().clone();
        b.init("at", &[d, &at]);
        if rng.gen_bool(0.3) {
            let to = locs.choose(rng).unwrap().clone();
            b.goal("at", &[d, &to]);
        }
    }
    for t in &ts {
        let at = locs.choose(rng).unwrap().clone();
        b.init("at", &[t, &at]);
        b.init("empty", &[t]);
        if rng.gen_bool(0.3) {
            let to = locs.choose(rng).unwrap().clone();
            b.goal("at", &[t, &to]);
        }
    }
    for p in &ps {
        let at = locs.choose(rng).unwrap().clone();
        let to = locs.choose(rng).unwrap().clone();
        b.init("at", &[p, &at]);
        b.goal("at", &[p, &to]);
    }
    b.finish("driverlog")
}

fn grippers(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let robots = 1 + s / 8;
    let rooms = 2 + s / 4;
    let balls = 1 + s / 2;
    let mut b = Builder::default();
    let rs = b.objs("robot", robots, "robot");
    let rooms = b.objs("room", rooms, "room");
    let balls = b.objs("ball", balls, "obj");
    for (i, r) in rs.iter().enumerate() {
        let l = b.obj(format!("lgripper{}", i + 1), "gripper");
        let g = b.obj(format!("rgripper{}", i + 1), "gripper");
        let at = rooms.choose(rng).unwrap().clone();
        b.init("at-robby", &[r, &at]);
        b.init("free", &[r, &l]);
        b.init("free", &[r, &g]);
    }
    for ball in &balls {
        let from = rooms.choose(rng).unwrap().clone();
        let to = loop {
            let t = rooms.choose(rng).unwrap();
            if *t != from {
                break t.clone();
            }
        };
        b.init("at", &[ball, &from]);
        b.goal("at", &[ball, &to]);
    }
    b.finish("grippers")
}

fn satellite(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let sats = 1 + s / 6;
    let n_modes = (1 + s / 4).min(MODES.len());
    let stations = 1 + s / 8;
    let targets = 1 + s / 3;
    let images = 1 + s / 3;
    let mut b = Builder::default();
    let mut modes: Vec<&str> = MODES.choose_multiple(rng, n_modes).copied().collect();
    modes.sort_unstable();
    for m in &modes {
        b.obj(*m, "mode");
    }
    let gs = b.objs("groundstation", stations, "direction");
    let stars = b.objs("star", stations, "direction");
    let calib: Vec<String> = gs.iter().chain(&stars).cloned().collect();
    let mut goals_dirs = Vec::new();
    for i in 1..=targets {
        let kind = if rng.gen_bool(0.6) { "planet" } else { "phenomenon" };
        goals_dirs.push(b.obj(format!("{kind}{i}"), "direction"));
    }
    let all_dirs: Vec<String> = calib.iter().chain(&goals_dirs).cloned().collect();
    let mut supported: Vec<&str> = Vec::new();
    let mut inst = 0;
    for sat in b.objs("satellite", sats, "satellite") {
        let d = all_dirs.choose(rng).unwrap().clone();
        b.init("pointing", &[&sat, &d]);
        b.init("power_avail", &[&sat]);
        for _ in 0..rng.gen_range(1..=2) {
            inst += 1;
            let i = b.obj(format!("instrument{inst}"), "instrument");
            b.init("on_board", &[&i, &sat]);
            let k = rng.gen_range(1..=2.min(modes.len()));
            for m in modes.choose_multiple(rng, k) {
                b.init("supports", &[&i, m]);
                supported.push(m);
            }
            let c = calib.choose(rng).unwrap().clone();
            b.init("calibration_target", &[&i, &c]);
        }
    }
    for _ in 0..images {
        let d = goals_dirs.choose(rng).unwrap().clone();
        let m = *supported.choose(rng).unwrap();
        b.goal("have_image", &[&d, m]);
    }
    b.finish("satellite")
}

fn hanoi(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let n = 1 + s;
    let mut b = Builder::default();
    let discs = b.objs("d", n, "disc");
    let pegs = b.objs("peg", 3, "peg");
    // d1 is the smallest disc
    for (i, d) in discs.iter().enumerate() {
        for p in &pegs {
            b.init("smaller", &[d, p]);
        }
        for bigger in &discs[i + 1..] {
            b.init("smaller", &[d, bigger]);
        }
    }
    let layout = |rng: &mut ChaCha8Rng| -> Vec<usize> { (0..n).map(|_| rng.gen_range(0..3)).collect() };
    // on-atoms of a layout: each disc sits on the next larger disc of its peg, else on the peg
    let atoms = |peg_of: &[usize]| -> Vec<(String, String)> {
        (0..n)
            .map(|i| {
                let below = (i + 1..n).find(|&j| peg_of[j] == peg_of[i]).map_or(pegs[peg_of[i]].clone(), |j| discs[j].clone());
                (discs[i].clone(), below)
            })
            .collect()
    };
    let start = layout(rng);
    for (d, below) in atoms(&start) {
        b.init("on", &[&d, &below]);
    }
    for (p, peg) in pegs.iter().enumerate() {
        match (0..n).find(|&i| start[i] == p) {
            Some(top) => b.init("clear", &[&discs[top]]),
            None => b.init("clear", &[peg]),
        }
    }
    let goal = loop {
        let g = layout(rng);
        if g != start {
            break g;
        }
    };
    for (d, below) in atoms(&goal) {
        b.goal("on", &[&d, &below]);
    }
    b.finish("hanoi")
}

fn depots(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let n_depots = 1 + s / 6;
    let n_dist = 1 + s / 6;
    let trucks = 1 + s / 10;
    let crates = 1 + s / 2;
    let mut b = Builder::default();
    let mut places = b.objs("depot", n_depots, "depot");
    places.extend(b.objs("distributor", n_dist, "distributor"));
    let mut pallets = Vec::new();
    for (i, p) in places.iter().enumerate() {
        let pallet = b.obj(format!("pallet{}", i + 1), "pallet");
        let hoist = b.obj(format!("hoist{}", i + 1), "hoist");
        b.init("at", &[&pallet, p]);
        b.init("at", &[&hoist, p]);
        b.init("available", &[&hoist]);
        pallets.push((pallet, p.clone()));
    }
    for t in b.objs("truck", trucks, "truck") {
        let p = places.choose(rng).unwrap().clone();
        b.init("at", &[&t, &p]);
    }
    let cs = b.objs("crate", crates, "crate");
    // start stacks
    let mut tops: Vec<String> = pallets.iter().map(|(p, _)| p.clone()).collect();
    for c in &cs {
        let k = rng.gen_range(0..pallets.len());
        let place = pallets[k].1.clone();
        let below = tops[k].clone();
        b.init("at", &[c, &place]);
        b.init("on", &[c, &below]);
        tops[k] = c.clone();
    }
    for t in &tops {
        b.init("clear", &[t]);
    }
    // target stacks
    let mut order = cs.clone();
    order.shuffle(rng);
    let mut tops: Vec<String> = pallets.iter().map(|(p, _)| p.clone()).collect();
    for c in &order {
        let k = rng.gen_range(0..pallets.len());
        b.goal("on", &[c, &tops[k]]);
        tops[k] = c.clone();
    }
    thin_goal(&mut b, 0.7, rng);
    b.finish("depots")
}

fn storage(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let crates = 1 + s / 4 + rng.gen_range(0..=1);
    let hoists = 1 + rng.gen_range(0..=s / 8);
    let depot_areas = crates + hoists + rng.gen_range(1..=2);
    let mut b = Builder::default();
    let depot = b.obj("depot0", "depot");
    let container = b.obj("container0", "container");
    let loadarea = b.obj("loadarea", "transitarea");
    let das: Vec<String> = (1..=depot_areas).map(|i| b.obj(format!("depot0-{i}"), "storearea")).collect();
    let cas: Vec<String> = (1..=crates).map(|i| b.obj(format!("container0-{i}"), "storearea")).collect();
    for a in &das {
        b.init("in", &[a, &depot]);
    }
    for a in &cas {
        b.init("in", &[a, &container]);
    }
    // depot areas form a line; the first touches the loading area
    for w in das.windows(2) {
        b.init("connected", &[&w[0], &w[1]]);
        b.init("connected", &[&w[1], &w[0]]);
    }
    // a few shortcuts make the layout less regular
    for i in 0..das.len().saturating_sub(2) {
        if rng.gen_bool(0.3) {
            b.init("connected", &[&das[i], &das[i + 2]]);
            b.init("connected", &[&das[i + 2], &das[i]]);
        }
    }
    b.init("connected", &[&das[0], &loadarea]);
    b.init("connected", &[&loadarea, &das[0]]);
    for a in &cas {
        b.init("connected", &[a, &loadarea]);
        b.init("connected", &[&loadarea, a]);
    }
    let hs = b.objs("hoist", hoists, "hoist");
    let mut free: Vec<&String> = das.iter().collect();
    free.shuffle(rng);
    let occupied: Vec<&String> = free.split_off(free.len() - hoists);
    for (h, a) in hs.iter().zip(&occupied) {
        b.init("at", &[h, a]);
        b.init("available", &[h]);
    }
    for a in &free {
        b.init("clear", &[a]);
    }
    let cs = b.objs("crate", crates, "crate");
    for (c, a) in cs.iter().zip(&cas) {
        b.init("on", &[c, a]);
        b.init("stored", &[c, &container]);
    }
    for c in &cs {
        b.goal("stored", &[c, &depot]);
    }
    thin_goal(&mut b, 0.8, rng);
    b.finish("storage")
}

fn childsnack(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let children = 1 + s / 3;
    let tables = rng.gen_range(1..=1 + s / 5);
    let trays = rng.gen_range(1..=1 + s / 8);
    let mut b = Builder::default();
    let kids = b.objs("child", children, "child");
    let allergic: Vec<bool> = kids.iter().map(|_| rng.gen_bool(0.4)).collect();
    let n_gf = allergic.iter().filter(|a| **a).count();
    // spare portions and sandwich slots vary the object sets
    let n_portions = children + rng.gen_range(0..=2);
    let breads = b.objs("bread", n_portions, "bread-portion");
    let contents = b.objs("content", n_portions, "content-portion");
    let sandws = b.objs("sandw", children + rng.gen_range(0..=2), "sandwich");
    let tray_names = b.objs("tray", trays, "tray");
    let table_names = b.objs("table", tables, "place");
    for (i, k) in kids.iter().enumerate() {
        b.init(if allergic[i] { "allergic_gluten" } else { "not_allergic_gluten" }, &[k]);
        let t = table_names.choose(rng).unwrap().clone();
        b.init("waiting", &[k, &t]);
        b.goal("served", &[k]);
    }
    let gf_bread = (n_gf + rng.gen_range(0..=1)).min(n_portions);
    let gf_content = (n_gf + rng.gen_range(0..=1)).min(n_portions);
    for (i, (br, co)) in breads.iter().zip(&contents).enumerate() {
        b.init("at_kitchen_bread", &[br]);
        b.init("at_kitchen_content", &[co]);
        if i < gf_bread {
            b.init("no_gluten_bread", &[br]);
        }
        if i < gf_content {
            b.init("no_gluten_content", &[co]);
        }
    }
    for (i, sw) in sandws.iter().enumerate() {
        // occasionally a plain sandwich is already made
        if i >= children && rng.gen_bool(0.5) {
            b.init("at_kitchen_sandwich", &[sw]);
        } else {
            b.init("notexist", &[sw]);
        }
    }
    for t in &tray_names {
        if rng.gen_bool(0.25) {
            let p = table_names.choose(rng).unwrap().clone();
            b.init("at", &[t, &p]);
        } else {
            b.init("at", &[t, "kitchen"]);
        }
    }
    thin_goal(&mut b, 0.8, rng);
    b.finish("childsnack")
}

fn barman(s: usize, rng: &mut ChaCha8Rng) -> Problem {
    let n_goals = 1 + s / 5;
    let cocktail_p = (s as f64 / 10.0).min(0.9);
    let mut b = Builder::default();
    let left = b.obj("left", "hand");
    let right = b.obj("right", "hand");
    let levels = b.objs("l", 3, "level").into_iter().collect::<Vec<_>>();
    let ingredients = b.objs("ingredient", 3, "ingredient");
    let dispensers = b.objs("dispenser", 3, "dispenser");
    let cocktails = b.objs("cocktail", 2, "cocktail");
    let shaker = b.obj("shaker1", "shaker");
    let shots = b.objs("shot", n_goals + 1, "shot");
    b.init("handempty", &[&left]);
    b.init("handempty", &[&right]);
    b.init("ontable", &[&shaker]);
    b.init("empty", &[&shaker]);
    b.init("clean", &[&shaker]);
    b.init("shaker-empty-level", &[&shaker, &levels[0]]);
    b.init("shaker-level", &[&shaker, &levels[0]]);
    b.init("next", &[&levels[0], &levels[1]]);
    b.init("next", &[&levels[1], &levels[2]]);
    for s in &shots {
        b.init("ontable", &[s]);
        b.init("empty", &[s]);
        b.init("clean", &[s]);
    }
    for (d, i) in dispensers.iter().zip(&ingredients) {
        b.init("dispenses", &[d, i]);
    }
    for c in &cocktails {
        let parts: Vec<&String> = ingredients.choose_multiple(rng, 2).collect();
        b.init("cocktail-part1", &[c, parts[0]]);
        b.init("cocktail-part2", &[c, parts[1]]);
    }
    for shot in &shots[..n_goals] {
        if rng.gen_bool(cocktail_p) {
            let c = cocktails.choose(rng).unwrap().clone();
            b.goal("contains", &[shot, &c]);
        } else {
            let i = ingredients.choose(rng).unwrap().clone();
            b.goal("contains", &[shot, &i]);
        }
    }
    b.finish("barman")
}
