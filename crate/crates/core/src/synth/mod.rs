//! Synthetic corpus with planted true links, namesake negatives, migrations
//! and patent activity. Used as the desk-scale fixture for the pipeline and
//! for tests that need realistic linkage difficulty.

mod pools;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Poisson};
use serde::{Deserialize, Serialize};

pub use pools::{
    EthnicPool, Field, DESTINATIONS, ETHNIC_POOLS, FALLBACK_ANSWERS, FIELDS, US_EMPLOYERS, US_INSTITUTIONS,
};

use crate::geo::CountryAssignments;
use crate::migration::HOME_COUNTRY;
use crate::names::NicknameTable;
use crate::records::{
    Authorship, Corpus, EmploymentStint, GraduateRecord, PatentCitation, PatentPaperPair, PublicationRecord,
    RecordsError,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub graduates: usize,
    pub embedding_dim: usize,
    pub first_cohort: i32,
    pub last_cohort: i32,
    pub data_end_year: i32,
    pub prolific_share: f64,
    pub prolific_pubs: (usize, usize),
    pub light_share: f64,
    pub light_pubs: (usize, usize),
    pub migrant_rate: f64,
    /// Mean number of non-graduate namesakes per graduate.
    pub namesakes_per_graduate: f64,
    pub namesake_pubs: (usize, usize),
    pub graduate_registry_rate: f64,
    pub author_registry_rate: f64,
    /// Share of graduates with a labeled employment history.
    pub history_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            graduates: 2000,
            embedding_dim: 32,
            first_cohort: 1995,
            last_cohort: 2016,
            data_end_year: 2024,
            prolific_share: 0.14,
            prolific_pubs: (5, 14),
            light_share: 0.20,
            light_pubs: (1, 2),
            migrant_rate: 0.25,
            namesakes_per_graduate: 0.5,
            namesake_pubs: (1, 6),
            graduate_registry_rate: 0.85,
            author_registry_rate: 0.92,
            history_rate: 0.7,
        }
    }
}

/// Where a graduate went, when the synthetic career includes a move abroad.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedMove {
    pub onset_relative_year: i32,
    pub destination: String,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub config: SynthConfig,
    pub corpus: Corpus,
    /// `(graduate_id, pub_id, author_position)` of every planted true authorship.
    pub true_links: BTreeSet<(String, String, u32)>,
    /// Countries each generated affiliation actually refers to.
    pub true_countries: CountryAssignments,
    pub planted_moves: BTreeMap<String, PlantedMove>,
    /// Answers for the file-backed fallback classifier.
    pub fallback_answers: BTreeMap<String, Option<String>>,
}

impl SynthOutput {
    /// Writes corpus files, `manifest.toml` and `mock_geo.tsv`. Returns the manifest path.
    pub fn write_to_dir(&self, dir: &Path) -> Result<std::path::PathBuf, RecordsError> {
        let manifest = self.corpus.write_to_dir(dir, true)?;
        let mut tsv = String::from("# affiliation\tcountry code ('-' for no answer)\n");
        for (s, c) in &self.fallback_answers {
            tsv.push_str(&format!("{s}\t{}\n", c.as_deref().unwrap_or("-")));
        }
        let path = dir.join("mock_geo.tsv");
        std::fs::write(&path, tsv).map_err(|source| RecordsError::Io { path, source })?;
        Ok(manifest)
    }
}

struct Person {
    first: String,
    middle: Option<String>,
    last: String,
}

impl Person {
    fn full(&self) -> String {
        match &self.middle {
            Some(m) => format!("{} {} {}", self.first, m, self.last),
            None => format!("{} {}", self.first, self.last),
        }
    }
}

/// Affiliation with the country it truly denotes.
#[derive(Clone)]
struct Place {
    text: String,
    countries: BTreeSet<String>,
}

impl Place {
    fn new(text: String, country: &str) -> Self {
        Place {
            text,
            countries: BTreeSet::from([country.to_string()]),
        }
    }
}

struct Generator {
    cfg: SynthConfig,
    rng: ChaCha8Rng,
    nicknames: NicknameTable,
    centroids: Vec<Vec<f64>>,
    pubs: Vec<PublicationRecord>,
    pub_fields: Vec<usize>,
    true_links: BTreeSet<(String, String, u32)>,
    true_countries: CountryAssignments,
    fallback_answers: BTreeMap<String, Option<String>>,
    fallback_addresses: BTreeMap<&'static str, Option<&'static str>>,
    next_namesake: usize,
    next_author: usize,
}

fn zipf_index(rng: &mut ChaCha8Rng, n: usize, exponent: f64) -> usize {
    let weights: Vec<f64> = (0..n).map(|i| 1.0 / ((i + 1) as f64).powf(exponent)).collect();
    WeightedIndex::new(&weights).expect("non-empty pool").sample(rng)
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

impl Generator {
    fn new(cfg: SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let dim = cfg.embedding_dim;
        let centroids = (0..FIELDS.len())
            .map(|_| {
                let normal = Normal::new(0.0, 1.0).expect("unit normal");
                let mut v: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
                normalize(&mut v);
                v
            })
            .collect();
        Generator {
            cfg,
            rng,
            nicknames: NicknameTable::bundled(),
            centroids,
            pubs: Vec::new(),
            pub_fields: Vec::new(),
            true_links: BTreeSet::new(),
            true_countries: CountryAssignments::default(),
            fallback_answers: BTreeMap::new(),
            fallback_addresses: FALLBACK_ANSWERS.iter().copied().collect(),
            next_namesake: 0,
            next_author: 0,
        }
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    fn gaussian(&mut self, scale: f64) -> Vec<f64> {
        let normal = Normal::new(0.0, scale / (self.cfg.embedding_dim as f64).sqrt()).expect("finite scale");
        (0..self.cfg.embedding_dim)
            .map(|_| normal.sample(&mut self.rng))
            .collect()
    }

    /// Research topic: a unit vector pulled toward the field centroid.
    fn topic(&mut self, field: usize) -> Vec<f64> {
        let noise = self.gaussian(1.0);
        let mut v: Vec<f64> = self.centroids[field]
            .iter()
            .zip(&noise)
            .map(|(c, n)| 0.8 * c + 1.1 * n)
            .collect();
        normalize(&mut v);
        v
    }

    fn embed_near(&mut self, topic: &[f64], spread: f64) -> Vec<f32> {
        let noise = self.gaussian(spread);
        let mut v: Vec<f64> = topic.iter().zip(&noise).map(|(t, n)| t + n).collect();
        normalize(&mut v);
        v.into_iter().map(|x| x as f32).collect()
    }

    fn pool(&mut self) -> &'static EthnicPool {
        let w: Vec<f64> = ETHNIC_POOLS.iter().map(|p| p.weight).collect();
        &ETHNIC_POOLS[WeightedIndex::new(&w).expect("weights").sample(&mut self.rng)]
    }

    fn person(&mut self, pool: &'static EthnicPool) -> Person {
        let first = pool.first[zipf_index(&mut self.rng, pool.first.len(), 0.6)].to_string();
        let last = pool.last[zipf_index(&mut self.rng, pool.last.len(), 0.8)].to_string();
        let middle = self.chance(pool.middle_rate).then(|| {
            MIDDLE_NAMES_POOL
                .choose(&mut self.rng)
                .expect("middle names")
                .to_string()
        });
        Person { first, middle, last }
    }

    fn random_person(&mut self) -> Person {
        let pool = self.pool();
        self.person(pool)
    }

    /// A display form of `p` that name matching still ties back to `p`.
    fn author_form(&mut self, p: &Person) -> String {
        let r: f64 = self.rng.random();
        if r < 0.12 {
            if let Some(m) = &p.middle {
                return format!("{}. {} {}", &p.first[..1], m, p.last);
            }
        }
        if r < 0.22 {
            let alts: Vec<String> = self
                .nicknames
                .nicknames(&p.first.to_uppercase())
                .into_iter()
                .filter(|n| *n != p.first.to_uppercase())
                .collect();
            if let Some(n) = alts.choose(&mut self.rng) {
                let mut nick = n.to_lowercase();
                nick[..1].make_ascii_uppercase();
                return format!("{nick} {}", p.last);
            }
        }
        if r < 0.35 {
            return format!("{}, {}", p.last, p.first);
        }
        p.full()
    }

    fn us_place(&mut self, department: &str) -> Place {
        let employer = *US_EMPLOYERS.choose(&mut self.rng).expect("employers");
        Place::new(format!("{department}, {employer}"), HOME_COUNTRY)
    }

    fn foreign_place(&mut self, department: &str, country: &str) -> Place {
        let (_, _, addresses) = DESTINATIONS.iter().find(|d| d.0 == country).expect("known destination");
        let address = *addresses.choose(&mut self.rng).expect("addresses");
        let text = format!("{department}, {address}");
        if let Some(answer) = self.fallback_addresses.get(address) {
            self.fallback_answers.insert(text.clone(), answer.map(str::to_string));
        }
        Place::new(text, country)
    }

    fn destination(&mut self) -> String {
        let w: Vec<f64> = DESTINATIONS.iter().map(|d| d.1).collect();
        DESTINATIONS[WeightedIndex::new(&w).expect("weights").sample(&mut self.rng)]
            .0
            .to_string()
    }

    fn add_pub(
        &mut self,
        year: i32,
        field: usize,
        authors: Vec<(String, Place, Option<String>)>,
        embedding: Option<Vec<f32>>,
        cites: Vec<String>,
    ) -> String {
        let pub_id = format!("P{:06}", self.pubs.len() + 1);
        let mut authorships = Vec::new();
        for (i, (name, place, registry)) in authors.into_iter().enumerate() {
            self.true_countries.insert(&pub_id, i as u32, place.countries.clone());
            authorships.push(Authorship {
                position: i as u32,
                display_name: name.clone(),
                raw_name: name,
                affiliation_string: place.text,
                registry_id: registry,
            });
        }
        self.pubs.push(PublicationRecord {
            pub_id: pub_id.clone(),
            pub_year: year,
            authorships,
            embedding,
            cited_pub_ids: cites,
            extra: Default::default(),
        });
        self.pub_fields.push(field);
        pub_id
    }

    /// Random earlier-generated publications, preferring the same field.
    fn random_refs(&mut self, field: usize, n: usize) -> Vec<String> {
        let mut out = Vec::new();
        if self.pubs.is_empty() {
            return out;
        }
        for _ in 0..n * 3 {
            if out.len() >= n {
                break;
            }
            let i = self.rng.random_range(0..self.pubs.len());
            if self.pub_fields[i] == field || self.chance(0.2) {
                out.push(self.pubs[i].pub_id.clone());
            }
        }
        out
    }

    fn coauthors(&mut self, department: &str, n: usize, home: &Place) -> Vec<(String, Place, Option<String>)> {
        (0..n)
            .map(|_| {
                let p = self.random_person();
                let place = if self.chance(0.7) {
                    home.clone()
                } else {
                    self.us_place(department)
                };
                let registry = self.chance(0.8).then(|| {
                    self.next_author += 1;
                    format!("REG-A{:07}", self.next_author)
                });
                (p.full(), place, registry)
            })
            .collect()
    }
}

const MIDDLE_NAMES_POOL: &[&str] = pools::MIDDLE_NAMES;

struct GradPlan {
    id: String,
    person: Person,
    grad_year: i32,
    field: usize,
    institution_place: Place,
    department: &'static str,
    topic: Vec<f64>,
    registry: Option<String>,
    advisor: Option<Person>,
    advisor_pubs: Vec<String>,
    migration: Option<PlantedMove>,
}

/// Generates the synthetic corpus.
pub fn generate(cfg: &SynthConfig) -> SynthOutput {
    let mut g = Generator::new(cfg.clone());
    let mut graduates = Vec::new();
    let mut plans = Vec::new();
    let mut histories = BTreeMap::new();
    let mut planted_moves = BTreeMap::new();

    for i in 0..cfg.graduates {
        let id = format!("G{:05}", i + 1);
        let pool = g.pool();
        let person = g.person(pool);
        let grad_year = g.rng.random_range(cfg.first_cohort..=cfg.last_cohort);
        let field = g.rng.random_range(0..FIELDS.len());
        let f = &FIELDS[field];
        let (institution, address) = *US_INSTITUTIONS.choose(&mut g.rng).expect("institutions");
        let topic = g.topic(field);
        let embedding = Some(g.embed_near(&topic, 0.5));
        let advisor = g.chance(0.85).then(|| g.random_person());
        let committee: Vec<String> = if g.chance(0.5) {
            (0..2).map(|_| g.random_person().full()).collect()
        } else {
            Vec::new()
        };
        let registry = g
            .chance(cfg.graduate_registry_rate)
            .then(|| format!("REG-G{:05}", i + 1));
        let migration = g.chance(cfg.migrant_rate).then(|| {
            let onset = match g.rng.random::<f64>() {
                r if r < 0.4 => g.rng.random_range(1..=5),
                r if r < 0.8 => g.rng.random_range(6..=10),
                _ => g.rng.random_range(11..=14),
            };
            PlantedMove {
                onset_relative_year: onset,
                destination: g.destination(),
            }
        });
        let foreign_national = g.chance(if migration.is_some() {
            (pool.foreign_national_rate + 0.3).min(0.95)
        } else {
            pool.foreign_national_rate
        });
        let raw_name = if g.chance(0.5) {
            person.full()
        } else {
            match &person.middle {
                Some(m) => format!("{}, {} {}", person.last, person.first, m),
                None => format!("{}, {}", person.last, person.first),
            }
        };
        graduates.push(GraduateRecord {
            graduate_id: id.clone(),
            raw_name,
            grad_year,
            institution: institution.to_string(),
            subject: f.subjects.choose(&mut g.rng).expect("subjects").to_string(),
            field: f.name.to_string(),
            tech_areas: f
                .tech_area
                .filter(|_| g.chance(0.3))
                .map(|t| BTreeSet::from([t.to_string()]))
                .unwrap_or_default(),
            advisor_names: advisor.iter().map(Person::full).collect(),
            committee_names: committee,
            embedding,
            ethnicity_label: g.chance(0.9).then(|| pool.label.to_string()),
            foreign_national: g.chance(0.8).then_some(foreign_national),
            registry_id: registry.clone(),
            extra: Default::default(),
        });
        if g.chance(cfg.history_rate) {
            let mut stints = vec![EmploymentStint {
                start_year: grad_year,
                end_year: migration.as_ref().map(|m| grad_year + m.onset_relative_year - 1),
                country: HOME_COUNTRY.to_string(),
            }];
            if let Some(m) = &migration {
                stints.push(EmploymentStint {
                    start_year: grad_year + m.onset_relative_year,
                    end_year: None,
                    country: m.destination.clone(),
                });
            }
            histories.insert(id.clone(), stints);
        }
        if let Some(m) = &migration {
            planted_moves.insert(id.clone(), m.clone());
        }
        plans.push(GradPlan {
            id,
            person,
            grad_year,
            field,
            institution_place: Place::new(format!("{}, {institution}, {address}", f.department), HOME_COUNTRY),
            department: f.department,
            topic,
            registry,
            advisor,
            advisor_pubs: Vec::new(),
            migration,
        });
    }

    // Advisor publications from the dissertation years, cited by later work.
    for plan in plans.iter_mut() {
        let Some(adv) = &plan.advisor else { continue };
        for _ in 0..2 {
            let year = plan.grad_year - g.rng.random_range(1..=6);
            let emb = Some(g.embed_near(&plan.topic, 0.9));
            let mut authors = vec![(adv.full(), plan.institution_place.clone(), None)];
            authors.extend(g.coauthors(plan.department, 1, &plan.institution_place.clone()));
            let refs = g.random_refs(plan.field, 3);
            let id = g.add_pub(year, plan.field, authors, emb, refs);
            plan.advisor_pubs.push(id);
        }
    }

    for plan in &plans {
        graduate_publications(&mut g, plan);
    }
    for plan in &plans {
        namesakes(&mut g, plan);
    }

    let patents = patent_activity(&mut g, &plans);
    let mut corpus = Corpus::from_records(cfg.embedding_dim, graduates, std::mem::take(&mut g.pubs))
        .expect("synthetic records are valid");
    corpus.employment_histories = histories;
    let (citations, low_confidence) = patents.0;
    corpus.patent_citations = citations;
    corpus.drops.low_confidence_citations = low_confidence;
    corpus.patent_paper_pairs = patents.1;

    SynthOutput {
        config: cfg.clone(),
        corpus,
        true_links: g.true_links,
        true_countries: g.true_countries,
        planted_moves,
        fallback_answers: g.fallback_answers,
    }
}

fn publication_count(g: &mut Generator) -> usize {
    let cfg = &g.cfg;
    let (ps, (pl, ph), ls, (ll, lh)) = (cfg.prolific_share, cfg.prolific_pubs, cfg.light_share, cfg.light_pubs);
    let r: f64 = g.rng.random();
    if r < ps {
        g.rng.random_range(pl..=ph)
    } else if r < ps + ls {
        g.rng.random_range(ll..=lh)
    } else {
        0
    }
}

fn graduate_publications(g: &mut Generator, plan: &GradPlan) {
    let n = publication_count(g);
    if n == 0 {
        return;
    }
    let last_rel = (g.cfg.data_end_year - plan.grad_year).min(15);
    let early = (1 + n / 4).min(n);
    let mut years: Vec<i32> = (0..early).map(|_| plan.grad_year - g.rng.random_range(0..=3)).collect();
    if n > early {
        // Later papers come in bursts of consecutive years.
        let start = g.rng.random_range(1..=last_rel.clamp(1, 4));
        let span = ((n - early) as i32 + g.rng.random_range(0..=4))
            .min(last_rel - start + 1)
            .max(1);
        for _ in early..n {
            years.push(plan.grad_year + start + g.rng.random_range(0..span));
        }
    }
    years.sort_unstable();
    let mut own_early = Vec::new();
    let mut own_all: Vec<String> = Vec::new();
    for year in years {
        let rel = year - plan.grad_year;
        let moved = plan.migration.as_ref().filter(|m| rel >= m.onset_relative_year);
        let place = if rel <= 0 {
            plan.institution_place.clone()
        } else if let Some(m) = moved {
            let abroad = g.foreign_place(plan.department, &m.destination);
            if g.chance(0.15) {
                let home = g.us_place(plan.department);
                Place {
                    text: format!("{}; {}", home.text, abroad.text),
                    countries: home.countries.union(&abroad.countries).cloned().collect(),
                }
            } else {
                abroad
            }
        } else if g.chance(0.06) {
            let c = g.destination();
            g.foreign_place(plan.department, &c)
        } else {
            g.us_place(plan.department)
        };
        let n_co = g.rng.random_range(1..=3);
        let mut authors = g.coauthors(plan.department, n_co, &place);
        if let Some(adv) = &plan.advisor {
            if (rel <= 0 && g.chance(0.8)) || g.chance(0.1) {
                authors.push((adv.full(), plan.institution_place.clone(), None));
            }
        }
        let registry = plan.registry.clone().filter(|_| g.chance(g.cfg.author_registry_rate));
        let pos = g.rng.random_range(0..=authors.len());
        let form = g.author_form(&plan.person);
        authors.insert(pos, (form, place, registry));

        let embedding = g.chance(0.92).then(|| g.embed_near(&plan.topic, 0.6));
        let mut cites = Vec::new();
        if !g.chance(0.08) {
            if rel > 0 && !own_early.is_empty() && g.chance(0.55) {
                cites.push(own_early.choose(&mut g.rng).cloned().expect("non-empty"));
            }
            if !own_all.is_empty() && g.chance(0.3) {
                cites.push(own_all.choose(&mut g.rng).cloned().expect("non-empty"));
            }
            if !plan.advisor_pubs.is_empty() && g.chance(0.4) {
                cites.push(plan.advisor_pubs.choose(&mut g.rng).cloned().expect("non-empty"));
            }
            let k = g.rng.random_range(2..=6);
            cites.extend(g.random_refs(plan.field, k));
            cites.sort();
            cites.dedup();
        }
        let pub_id = g.add_pub(year, plan.field, authors, embedding, cites);
        g.true_links.insert((plan.id.clone(), pub_id.clone(), pos as u32));
        if rel <= 0 {
            own_early.push(pub_id.clone());
        }
        own_all.push(pub_id);
    }
}

/// Non-graduate authors whose names are compatible with the graduate's.
fn namesakes(g: &mut Generator, plan: &GradPlan) {
    let mean = g.cfg.namesakes_per_graduate;
    let count = Poisson::new(mean).map(|p| p.sample(&mut g.rng) as usize).unwrap_or(0);
    for _ in 0..count {
        g.next_namesake += 1;
        let registry = format!("REG-N{:06}", g.next_namesake);
        let r: f64 = g.rng.random();
        let first = if r < 0.25 {
            let alts: Vec<String> = g
                .nicknames
                .nicknames(&plan.person.first.to_uppercase())
                .into_iter()
                .filter(|n| *n != plan.person.first.to_uppercase())
                .collect();
            alts.choose(&mut g.rng)
                .map(|n| {
                    let mut s = n.to_lowercase();
                    s[..1].make_ascii_uppercase();
                    s
                })
                .unwrap_or_else(|| plan.person.first.clone())
        } else {
            plan.person.first.clone()
        };
        let person = Person {
            first,
            middle: plan.person.middle.clone().filter(|_| g.chance(0.5)),
            last: plan.person.last.clone(),
        };
        let same_field = g.chance(0.35);
        let field = if same_field {
            plan.field
        } else {
            g.rng.random_range(0..FIELDS.len())
        };
        let topic = g.topic(field);
        let department = FIELDS[field].department;
        let same_institution = g.chance(0.08);
        let abroad = g.chance(0.4);
        let country = g.destination();
        let (lo, hi) = g.cfg.namesake_pubs;
        let n = g.rng.random_range(lo..=hi);
        for _ in 0..n {
            let year = plan.grad_year + g.rng.random_range(-6..=16);
            let place = if same_institution {
                plan.institution_place.clone()
            } else if abroad {
                g.foreign_place(department, &country)
            } else {
                g.us_place(department)
            };
            let n_co = g.rng.random_range(1..=3);
            let mut authors = g.coauthors(department, n_co, &place);
            let reg = g.chance(g.cfg.author_registry_rate).then(|| registry.clone());
            let pos = g.rng.random_range(0..=authors.len());
            let form = g.author_form(&person);
            authors.insert(pos, (form, place, reg));
            let embedding = g.chance(0.92).then(|| g.embed_near(&topic, 0.75));
            let mut cites = Vec::new();
            if !g.chance(0.08) {
                if !plan.advisor_pubs.is_empty() && g.chance(0.03) {
                    cites.push(plan.advisor_pubs[0].clone());
                }
                let k = g.rng.random_range(2..=6);
                cites.extend(g.random_refs(field, k));
                cites.sort();
                cites.dedup();
            }
            g.add_pub(year, field, authors, embedding, cites);
        }
    }
}

type PatentOutput = ((Vec<PatentCitation>, usize), BTreeSet<PatentPaperPair>);

/// Patent citations and patent-paper pairs. US assignees cite pre-move work
/// of emigrants more than post-move work; destination assignees the reverse.
fn patent_activity(g: &mut Generator, plans: &[GradPlan]) -> PatentOutput {
    let plan_of: BTreeMap<&str, &GradPlan> = plans.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut authored: BTreeMap<String, &GradPlan> = BTreeMap::new();
    for (gid, pid, _) in &g.true_links {
        authored.insert(pid.clone(), plan_of[gid.as_str()]);
    }
    let mut citations = Vec::new();
    let mut pairs = BTreeSet::new();
    let mut dropped = 0;
    let mut next_patent = 0usize;
    let pubs: Vec<(String, i32)> = g.pubs.iter().map(|p| (p.pub_id.clone(), p.pub_year)).collect();
    for (pid, year) in pubs {
        let owner = authored.get(&pid).copied();
        let rate = if owner.is_some() { 0.8 } else { 0.25 };
        let n = Poisson::new(rate).map(|p| p.sample(&mut g.rng) as usize).unwrap_or(0);
        for _ in 0..n {
            let (us_share, dest_share, dest) = match owner.and_then(|p| p.migration.as_ref().map(|m| (p, m))) {
                Some((p, m)) if year >= p.grad_year + m.onset_relative_year => (0.5, 0.10, Some(m.destination.clone())),
                Some((_, m)) => (0.7, 0.02, Some(m.destination.clone())),
                None if owner.is_some() => (0.65, 0.0, None),
                None => (0.4, 0.0, None),
            };
            let r: f64 = g.rng.random();
            let assignee = if r < us_share {
                HOME_COUNTRY.to_string()
            } else if r < us_share + dest_share {
                dest.clone().expect("destination share only with a destination")
            } else {
                pools::ASSIGNEE_COUNTRIES
                    .iter()
                    .filter(|c| Some(c.to_string()) != dest)
                    .copied()
                    .collect::<Vec<_>>()
                    .choose(&mut g.rng)
                    .expect("assignee pool")
                    .to_string()
            };
            next_patent += 1;
            let confidence = g.rng.random_range(1..=10u8);
            if confidence < 3 {
                dropped += 1;
                continue;
            }
            citations.push(PatentCitation {
                patent_id: format!("US{:08}", 7_000_000 + next_patent),
                filing_year: year + g.rng.random_range(1..=8),
                assignee_country: assignee,
                cited_pub_id: pid.clone(),
                confidence,
            });
        }
        if owner.is_some() && g.chance(0.03) {
            next_patent += 1;
            pairs.insert(PatentPaperPair {
                patent_id: format!("US{:08}", 7_000_000 + next_patent),
                pub_id: pid.clone(),
            });
        }
    }
    ((citations, dropped), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            graduates: 60,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small());
        let b = generate(&small());
        assert_eq!(a.corpus.publications, b.corpus.publications);
        assert_eq!(a.true_links, b.true_links);
    }

    #[test]
    fn true_links_point_at_matching_authors() {
        let out = generate(&small());
        for (gid, pid, pos) in &out.true_links {
            let a = out.corpus.publications[pid].authorship(*pos).unwrap();
            let reg = out.corpus.graduates[gid].registry_id.as_deref();
            if let (Some(r), Some(ar)) = (reg, a.registry_id.as_deref()) {
                assert_eq!(r, ar);
            }
        }
    }

    #[test]
    fn histories_follow_planted_moves() {
        let out = generate(&small());
        for (gid, stints) in &out.corpus.employment_histories {
            let abroad = stints.iter().any(|s| s.country != HOME_COUNTRY);
            assert_eq!(abroad, out.planted_moves.contains_key(gid));
        }
    }
}
