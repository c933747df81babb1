//! Name, field and institution pools for the synthetic corpus.

pub struct EthnicPool {
    pub label: &'static str,
    pub weight: f64,
    pub foreign_national_rate: f64,
    pub first: &'static [&'static str],
    pub last: &'static [&'static str],
    pub middle_rate: f64,
}

pub const ETHNIC_POOLS: &[EthnicPool] = &[
    EthnicPool {
        label: "east_asian",
        weight: 0.30,
        foreign_national_rate: 0.8,
        first: &[
            "Wei", "Jing", "Lei", "Yan", "Hui", "Min", "Jun", "Xiao", "Ying", "Hao", "Lin", "Tao", "Yu", "Ming",
            "Qiang", "Fang", "Jie", "Li", "Hong", "Bo", "Chen", "Ji", "Hyun", "Sung", "Jae", "Hiroshi", "Takeshi",
            "Yuki", "Kenji", "Minh", "Anh", "Thanh",
        ],
        last: &[
            "Wang",
            "Li",
            "Zhang",
            "Liu",
            "Chen",
            "Yang",
            "Huang",
            "Zhao",
            "Wu",
            "Zhou",
            "Xu",
            "Sun",
            "Ma",
            "Zhu",
            "Hu",
            "Guo",
            "He",
            "Lin",
            "Gao",
            "Luo",
            "Zheng",
            "Liang",
            "Xie",
            "Tang",
            "Han",
            "Cao",
            "Deng",
            "Feng",
            "Kim",
            "Lee",
            "Park",
            "Choi",
            "Jung",
            "Kang",
            "Cho",
            "Yoon",
            "Tanaka",
            "Suzuki",
            "Sato",
            "Watanabe",
            "Nguyen",
            "Tran",
            "Pham",
            "Le",
            "Yamamoto",
            "Kobayashi",
            "Shen",
            "Song",
            "Pan",
            "Yuan",
        ],
        middle_rate: 0.05,
    },
    EthnicPool {
        label: "south_asian",
        weight: 0.12,
        foreign_national_rate: 0.7,
        first: &[
            "Rahul", "Amit", "Priya", "Anil", "Sunil", "Deepak", "Ravi", "Sanjay", "Vikram", "Anjali", "Neha", "Arun",
            "Ashok", "Rajesh", "Suresh", "Kavita", "Pooja", "Manish", "Nikhil", "Rohit", "Sandeep", "Vijay", "Ajay",
            "Meera",
        ],
        last: &[
            "Patel",
            "Shah",
            "Kumar",
            "Singh",
            "Gupta",
            "Sharma",
            "Reddy",
            "Rao",
            "Iyer",
            "Mehta",
            "Joshi",
            "Desai",
            "Agarwal",
            "Banerjee",
            "Chatterjee",
            "Das",
            "Ghosh",
            "Jain",
            "Kapoor",
            "Khan",
            "Krishnan",
            "Menon",
            "Mishra",
            "Nair",
            "Pillai",
            "Saxena",
            "Sinha",
            "Srinivasan",
            "Venkatesh",
            "Verma",
            "Bhat",
            "Chopra",
            "Malhotra",
            "Naidu",
            "Pandey",
            "Subramanian",
            "Trivedi",
            "Yadav",
            "Bose",
            "Dutta",
        ],
        middle_rate: 0.15,
    },
    EthnicPool {
        label: "hispanic",
        weight: 0.12,
        foreign_national_rate: 0.3,
        first: &[
            "Jose",
            "Juan",
            "Carlos",
            "Luis",
            "Miguel",
            "Jorge",
            "Maria",
            "Ana",
            "Sofia",
            "Diego",
            "Alejandro",
            "Fernando",
            "Ricardo",
            "Roberto",
            "Eduardo",
            "Javier",
            "Lucia",
            "Elena",
            "Gabriela",
            "Pablo",
            "Andres",
            "Francisco",
            "Manuel",
            "Isabel",
        ],
        last: &[
            "Garcia",
            "Rodriguez",
            "Martinez",
            "Hernandez",
            "Lopez",
            "Gonzalez",
            "Perez",
            "Sanchez",
            "Ramirez",
            "Torres",
            "Flores",
            "Rivera",
            "Gomez",
            "Diaz",
            "Reyes",
            "Morales",
            "Cruz",
            "Ortiz",
            "Gutierrez",
            "Chavez",
            "Ramos",
            "Ruiz",
            "Alvarez",
            "Mendoza",
            "Castillo",
            "Jimenez",
            "Moreno",
            "Romero",
            "Herrera",
            "Medina",
            "Aguilar",
            "Vargas",
            "Castro",
            "Guzman",
            "Fernandez",
            "Vasquez",
            "Salazar",
            "Soto",
            "Delgado",
            "Pena",
            "Rios",
            "Navarro",
            "Dominguez",
            "Sandoval",
            "Guerrero",
            "Estrada",
            "Contreras",
            "Figueroa",
            "Cabrera",
            "Campos",
        ],
        middle_rate: 0.35,
    },
    EthnicPool {
        label: "white",
        weight: 0.40,
        foreign_national_rate: 0.15,
        first: &[
            "Robert",
            "William",
            "James",
            "John",
            "Michael",
            "David",
            "Richard",
            "Thomas",
            "Charles",
            "Joseph",
            "Christopher",
            "Daniel",
            "Matthew",
            "Andrew",
            "Steven",
            "Edward",
            "Jonathan",
            "Benjamin",
            "Samuel",
            "Nicholas",
            "Elizabeth",
            "Katherine",
            "Margaret",
            "Jennifer",
            "Susan",
            "Patricia",
            "Rebecca",
            "Victoria",
            "Alexander",
            "Peter",
            "Timothy",
            "Anthony",
            "Stephen",
            "Gregory",
            "Kenneth",
            "Jessica",
            "Sarah",
            "Emily",
            "Laura",
            "Anna",
        ],
        last: &[
            "Smith",
            "Johnson",
            "Williams",
            "Brown",
            "Jones",
            "Miller",
            "Davis",
            "Wilson",
            "Anderson",
            "Taylor",
            "Thomas",
            "Moore",
            "Martin",
            "Jackson",
            "Thompson",
            "White",
            "Harris",
            "Clark",
            "Lewis",
            "Robinson",
            "Walker",
            "Young",
            "Allen",
            "King",
            "Wright",
            "Scott",
            "Hill",
            "Green",
            "Adams",
            "Baker",
            "Nelson",
            "Carter",
            "Mitchell",
            "Roberts",
            "Turner",
            "Phillips",
            "Campbell",
            "Parker",
            "Evans",
            "Edwards",
            "Collins",
            "Stewart",
            "Morris",
            "Murphy",
            "Cook",
            "Rogers",
            "Morgan",
            "Peterson",
            "Cooper",
            "Reed",
            "Bailey",
            "Bell",
            "Kelly",
            "Howard",
            "Ward",
            "Cox",
            "Richardson",
            "Wood",
            "Watson",
            "Brooks",
            "Bennett",
            "Gray",
            "James",
            "Hughes",
            "Price",
            "Sanders",
            "Myers",
            "Long",
            "Ross",
            "Foster",
            "Powell",
            "Jenkins",
            "Perry",
            "Russell",
            "Sullivan",
            "Fisher",
            "Butler",
            "Barnes",
            "Henderson",
            "Coleman",
            "Simmons",
            "Patterson",
            "Jordan",
            "Reynolds",
            "Hamilton",
            "Graham",
            "Wallace",
            "Woods",
            "Cole",
            "West",
            "Owens",
            "Marshall",
            "Ellis",
            "Harrison",
            "Gibson",
            "McDonald",
            "Murray",
            "Ford",
            "Wells",
            "Hayes",
            "Schmidt",
            "Mueller",
            "Weber",
            "Wagner",
            "Becker",
            "Hoffmann",
            "Schulz",
            "Koch",
            "Richter",
            "Klein",
            "Wolf",
            "Neumann",
            "Schwarz",
            "Zimmermann",
            "Braun",
            "Hartmann",
            "Lange",
            "Werner",
            "Krause",
            "Lehmann",
            "Kaiser",
            "Fuchs",
            "Peters",
            "Lang",
            "Scholz",
            "Moeller",
            "Weiss",
            "Jung",
            "Hahn",
            "Vogel",
            "Friedrich",
            "Keller",
            "Guenther",
            "Frank",
            "Berger",
            "Winkler",
            "Roth",
            "Beck",
            "Lorenz",
            "Baumann",
            "Franke",
            "Albrecht",
            "Schuster",
            "Simon",
            "Ludwig",
            "Boehm",
            "Winter",
            "Kraus",
            "Martens",
            "Olsen",
            "Larsen",
            "Hansen",
            "Nielsen",
            "Andersen",
            "Petersen",
            "Rasmussen",
            "Johansson",
            "Karlsson",
            "Nilsson",
            "Eriksson",
            "Larsson",
            "Olsson",
            "Persson",
            "Svensson",
            "Gustafsson",
            "Pettersson",
            "Jonsson",
            "Rossi",
            "Russo",
            "Ferrari",
            "Esposito",
            "Bianchi",
            "Romano",
            "Colombo",
            "Ricci",
            "Marino",
            "Greco",
            "Bruno",
            "Gallo",
            "Conti",
            "DeLuca",
            "Mancini",
            "Costa",
            "Giordano",
            "Rizzo",
            "Lombardi",
            "Moretti",
            "O'Brien",
            "O'Connor",
            "Kennedy",
            "Ryan",
            "Byrne",
            "Walsh",
            "Doyle",
            "Quinn",
            "Brennan",
            "Burke",
            "Novak",
            "Kowalski",
            "Nowak",
            "Wisniewski",
            "Wojcik",
            "Kaminski",
            "Lewandowski",
            "Zielinski",
            "Szymanski",
            "Dubois",
            "Lefebvre",
            "Moreau",
            "Laurent",
            "Fournier",
            "Girard",
            "Bonnet",
            "Dupont",
            "Lambert",
            "Fontaine",
            "Rousseau",
            "Vincent",
            "Muller",
            "Lefevre",
            "Faure",
            "Andre",
            "Mercier",
            "Blanc",
            "Guerin",
            "Boyer",
            "Van der Berg",
            "De Vries",
            "Van Dijk",
            "Bakker",
            "Janssen",
            "Visser",
            "Smit",
            "Meijer",
            "De Boer",
            "Mulder",
            "Ivanov",
            "Smirnov",
            "Kuznetsov",
            "Popov",
            "Volkov",
            "Sokolov",
            "Lebedev",
            "Kozlov",
            "Novikov",
            "Morozov",
            "Pavlov",
            "Orlov",
            "Stein",
            "Rosen",
            "Cohen",
            "Levy",
            "Katz",
            "Friedman",
            "Goldberg",
            "Shapiro",
        ],
        middle_rate: 0.45,
    },
    EthnicPool {
        label: "black",
        weight: 0.06,
        foreign_national_rate: 0.25,
        first: &[
            "Marcus",
            "Andre",
            "Jamal",
            "Darnell",
            "Terrence",
            "Malik",
            "Aisha",
            "Keisha",
            "Tanisha",
            "Jasmine",
            "Kwame",
            "Chinedu",
            "Oluwaseun",
            "Adebayo",
            "Ngozi",
            "Chidi",
        ],
        last: &[
            "Washington",
            "Jefferson",
            "Banks",
            "Mosley",
            "Okafor",
            "Okonkwo",
            "Adeyemi",
            "Mensah",
            "Asante",
            "Boateng",
            "Diallo",
            "Ndiaye",
            "Mbeki",
            "Nwosu",
            "Eze",
            "Obi",
            "Owusu",
            "Addo",
            "Kariuki",
            "Mwangi",
            "Odhiambo",
            "Otieno",
            "Kamau",
            "Njoroge",
            "Achebe",
        ],
        middle_rate: 0.3,
    },
];

pub const MIDDLE_NAMES: &[&str] = &[
    "Robert",
    "James",
    "Lee",
    "Marie",
    "Ann",
    "Michael",
    "Alan",
    "Edward",
    "Grace",
    "Louise",
    "Joseph",
    "Paul",
    "Ray",
    "Lynn",
    "Scott",
    "Thomas",
    "Elizabeth",
    "Jean",
    "Kumar",
    "Antonio",
];

pub struct Field {
    pub name: &'static str,
    pub subjects: &'static [&'static str],
    pub tech_area: Option<&'static str>,
    pub department: &'static str,
}

pub const FIELDS: &[Field] = &[
    Field {
        name: "Physics",
        subjects: &["Condensed Matter", "Quantum Physics", "Optics"],
        tech_area: Some("Quantum"),
        department: "Dept. of Physics",
    },
    Field {
        name: "Chemistry",
        subjects: &["Organic Chemistry", "Physical Chemistry"],
        tech_area: None,
        department: "Dept. of Chemistry",
    },
    Field {
        name: "Biology",
        subjects: &["Molecular Biology", "Neuroscience", "Genetics"],
        tech_area: Some("Biotech"),
        department: "Dept. of Biology",
    },
    Field {
        name: "Computer Science",
        subjects: &["Artificial Intelligence", "Systems", "Theory"],
        tech_area: Some("AI"),
        department: "Dept. of Computer Science",
    },
    Field {
        name: "Mathematics",
        subjects: &["Applied Mathematics", "Statistics"],
        tech_area: None,
        department: "Dept. of Mathematics",
    },
    Field {
        name: "Engineering",
        subjects: &["Electrical Engineering", "Materials Science", "Mechanical Engineering"],
        tech_area: Some("Semiconductors"),
        department: "School of Engineering",
    },
];

/// Degree-granting institutions: name as recorded on the dissertation and
/// the address that follows the department in affiliation strings.
pub const US_INSTITUTIONS: &[(&str, &str)] = &[
    ("Stanford University", "Stanford, CA 94305, USA"),
    ("Massachusetts Institute of Technology", "Cambridge, MA 02139"),
    ("Harvard University", "Cambridge, Massachusetts"),
    ("University of Michigan", "Ann Arbor, MI 48109"),
    ("University of Wisconsin", "Madison, WI 53706, USA"),
    ("Cornell University", "Ithaca, NY 14853"),
    ("University of Texas at Austin", "Austin, Texas"),
    ("University of Washington", "Seattle, WA 98195"),
    ("Princeton University", "Princeton, New Jersey 08544"),
    ("University of Illinois", "Urbana, IL 61801, USA"),
    ("Georgia Institute of Technology", "Atlanta, GA 30332"),
    ("University of Minnesota", "Minneapolis, Minnesota"),
    ("Purdue University", "West Lafayette, IN 47907"),
    ("Columbia University", "New York, NY 10027"),
    ("University of Colorado", "Boulder, Colorado, USA"),
    ("Ohio State University", "Columbus, OH 43210"),
];

/// US employers for postdocs and faculty positions after graduation.
pub const US_EMPLOYERS: &[&str] = &[
    "IBM T. J. Watson Research Center, Yorktown Heights, NY 10598",
    "Bell Labs, Murray Hill, New Jersey",
    "Lawrence Berkeley National Laboratory, Berkeley, CA 94720",
    "Argonne National Laboratory, Lemont, Illinois",
    "National Institutes of Health, Bethesda, MD 20892",
    "Google Research, Mountain View, California",
    "Duke University, Durham, NC 27708",
    "Johns Hopkins University, Baltimore, Maryland",
    "University of Chicago, Chicago, IL 60637",
    "Rice University, Houston, TX 77005",
    "University of Pennsylvania, Philadelphia, PA 19104",
    "Carnegie Mellon University, Pittsburgh, Pennsylvania",
    "Yale University, New Haven, CT 06520",
    "Caltech, Pasadena, CA 91125",
    "Oak Ridge National Laboratory, Oak Ridge, Tennessee",
    "Emory University, Atlanta, Georgia",
];

/// Foreign destinations with sampling weight and affiliation addresses.
/// Entries without a country or state name are resolved by the fallback classifier.
pub const DESTINATIONS: &[(&str, f64, &[&str])] = &[
    (
        "CN",
        0.20,
        &[
            "Tsinghua University, Beijing 100084, China",
            "Fudan University, Shanghai, P.R. China",
            "Inst. of Physics, CAS, Beijing",
        ],
    ),
    (
        "GB",
        0.11,
        &[
            "University of Oxford, Oxford OX1 3PU, UK",
            "Imperial College London, London SW7 2AZ, United Kingdom",
            "Cavendish Lab., Cambridge CB3 0HE",
        ],
    ),
    (
        "DE",
        0.10,
        &[
            "Max Planck Institute for Chemistry, Mainz, Germany",
            "TU Munich, Garching, Germany",
            "Max-Planck-Inst. Quantenopt., Garching",
        ],
    ),
    (
        "CA",
        0.12,
        &[
            "University of Toronto, Toronto, ON M5S, Canada",
            "McGill University, Montreal, Quebec, Canada",
        ],
    ),
    (
        "KR",
        0.06,
        &[
            "Seoul National University, Seoul, Korea",
            "KAIST, Daejeon 34141, Republic of Korea",
        ],
    ),
    (
        "JP",
        0.06,
        &[
            "University of Tokyo, Tokyo 113-0033, Japan",
            "RIKEN, Wako, Saitama, Japan",
        ],
    ),
    ("FR", 0.06, &["CNRS, Paris, France", "Lab. Kastler Brossel, ENS, Paris"]),
    (
        "CH",
        0.05,
        &["ETH Zurich, Zurich, Switzerland", "EPFL, Lausanne, Switzerland"],
    ),
    (
        "IN",
        0.05,
        &[
            "Indian Institute of Science, Bangalore, India",
            "IIT Bombay, Powai, Mumbai, India",
        ],
    ),
    (
        "TW",
        0.04,
        &[
            "National Taiwan University, Taipei, Taiwan",
            "Inst. Phys., Acad. Sin., Taipei",
        ],
    ),
    ("IL", 0.03, &["Weizmann Institute of Science, Rehovot, Israel"]),
    ("AU", 0.04, &["University of Melbourne, Melbourne, VIC 3010, Australia"]),
    ("SG", 0.03, &["National University of Singapore, Singapore 117542"]),
    ("NL", 0.03, &["Delft University of Technology, Delft, The Netherlands"]),
    ("SE", 0.02, &["Karolinska Institutet, Stockholm, Sweden"]),
];

/// Fallback-classifier answers for synthetic addresses the gazetteer cannot place.
pub const FALLBACK_ANSWERS: &[(&str, Option<&str>)] = &[
    ("Inst. of Physics, CAS, Beijing", Some("CN")),
    ("Cavendish Lab., Cambridge CB3 0HE", Some("GB")),
    ("Max-Planck-Inst. Quantenopt., Garching", Some("DE")),
    ("Lab. Kastler Brossel, ENS, Paris", Some("FR")),
    ("Inst. Phys., Acad. Sin., Taipei", Some("TW")),
    ("Independent Researcher", None),
];

/// Assignee countries for patent citations other than the US and destinations.
pub const ASSIGNEE_COUNTRIES: &[&str] = &["JP", "DE", "CN", "KR", "GB", "FR", "CH", "NL", "CA", "TW"];
