"""Regenerates corpus.json and stories.json.

Fixture content for tests and demos, not a canonical corpus: 8 genres x 6
types, 90 items, plus six segmented stories.
"""
import json
import pathlib

HERE = pathlib.Path(__file__).parent
VOICES = ["female-1", "female-2", "female-3", "male-1", "male-2", "male-3"]

S = {
    "Adventure": [
        ("Popularity", "Adventure films became popular in Hollywood in the 30s and 40s with the films Robin Hood and Zorro."),
        ("Example", "The Lord of the Rings series is one of the most successful and well-known examples of the adventure field and has greatly increased the recognition of Scandinavian mythology in the world."),
        ("Actor/Actress", "When you think of adventure movies, Daniel Radcliffe and Johnny Depp come to mind with their serial films."),
        ("Fun fact", "Did you know that Johnny Depp's popular Pirates of the Caribbean movie series is one of the most popular examples of this genre and that he was inspired by the Jack Sparrow character, pirate Yusuf Reis?"),
        ("Platform", "Uncharted, an adaptation of a video game series about a treasure hunt, can be watched on Netflix."),
        ("Theme", "Some movies in the adventure genre focus on the theme of saving humanity. For example, Interstellar is about astronauts who set out to plug a black hole."),
        ("Popularity", "Raiders of the Lost Ark brought the old cliffhanger serials back to the big screen in 1981."),
        ("Example", "Jumanji turned a board game into a jungle that breaks into an ordinary living room."),
        ("Actor/Actress", "Harrison Ford played both Han Solo and Indiana Jones, two of the best known adventurers in cinema."),
        ("Fun fact", "The rolling boulder in Raiders of the Lost Ark was made of fiberglass and plaster."),
        ("Platform", "The Indiana Jones films are available to stream on Disney+ in many countries."),
        ("Theme", "Many adventure stories follow a map, a missing relative or a lost city that nobody else believes in."),
    ],
    "Animation": [
        ("Popularity", "Snow White and the Seven Dwarfs was the first full-length cel-animated feature and became a huge hit in 1937."),
        ("Example", "Spirited Away is a classic example of hand-drawn animation and won an Academy Award."),
        ("Actor/Actress", "Tom Hanks has voiced Woody in every Toy Story film."),
        ("Fun fact", "Toy Story was the first feature film made entirely with computer animation."),
        ("Platform", "Most Studio Ghibli films can be found on Netflix outside the United States."),
        ("Theme", "Animated films often use talking animals to tell stories about friendship and growing up."),
        ("Popularity", "The Lion King was one of the highest-grossing films of the 1990s."),
        ("Example", "Wall-E tells most of its story with almost no dialogue."),
        ("Actor/Actress", "Robin Williams improvised many of the Genie's lines in Aladdin."),
        ("Fun fact", "Every frame of a stop-motion film like Coraline is posed by hand."),
        ("Theme", "Many animated films are really about parents and children learning to understand each other."),
    ],
    "Comedy": [
        ("Popularity", "Silent comedies made Charlie Chaplin and Buster Keaton world famous in the 1920s."),
        ("Example", "Some Like It Hot is often named one of the funniest films ever made."),
        ("Actor/Actress", "Jim Carrey became a comedy star with Ace Ventura, The Mask and Dumb and Dumber in a single year."),
        ("Fun fact", "Buster Keaton performed most of his own stunts, including a house facade falling around him."),
        ("Platform", "Many classic sitcom-style comedies can be found on Amazon Prime Video."),
        ("Theme", "Comedies often put an ordinary person into a situation where everything goes wrong at once."),
        ("Popularity", "Romantic comedies filled cinemas in the late 1980s and 1990s."),
        ("Example", "Groundhog Day traps its hero in the same day over and over."),
        ("Actor/Actress", "Melissa McCarthy earned an Oscar nomination for her role in Bridesmaids."),
        ("Fun fact", "Monty Python and the Holy Grail used coconut shells because the budget did not allow real horses."),
        ("Platform", "Stand-up comedy specials are released on Netflix almost every week."),
        ("Theme", "A lot of comedies are about families who cannot stand each other during a holiday."),
    ],
    "Crime": [
        ("Popularity", "Gangster films became popular in the early 1930s with Little Caesar and Scarface."),
        ("Example", "The Godfather follows a crime family across two generations."),
        ("Actor/Actress", "Al Pacino and Robert De Niro shared a famous coffee shop scene in Heat."),
        ("Fun fact", "The cat in the opening scene of The Godfather was a stray found on the studio lot."),
        ("Platform", "Knives Out and its sequel are easy to find on streaming services."),
        ("Theme", "Crime films often ask whether a good person can stay good after one bad decision."),
        ("Popularity", "Heist movies like Ocean's Eleven made clever robberies look glamorous."),
        ("Example", "Pulp Fiction tells its crime stories out of order."),
        ("Actor/Actress", "Morgan Freeman and Brad Pitt played two detectives chasing a killer in Se7en."),
        ("Fun fact", "Fargo opens by claiming to be a true story, but the plot was invented."),
        ("Theme", "Many detective stories end at a dinner table where the culprit is finally named."),
    ],
    "Drama": [
        ("Popularity", "Courtroom dramas were especially popular in the 1950s and 1960s."),
        ("Example", "The Shawshank Redemption is a drama about hope inside a prison."),
        ("Actor/Actress", "Meryl Streep holds the record for the most Academy Award acting nominations."),
        ("Fun fact", "Twelve Angry Men takes place almost entirely in a single jury room."),
        ("Platform", "Many award-winning dramas premiere directly on streaming platforms now."),
        ("Theme", "Dramas often show how an old friendship changes when one friend becomes successful."),
        ("Popularity", "Biographical dramas are a regular favorite during awards season."),
        ("Example", "Forrest Gump follows one man through several decades of American history."),
        ("Actor/Actress", "Denzel Washington has played teachers, soldiers and lawyers in his dramas."),
        ("Fun fact", "Boyhood was filmed over twelve years with the same young actor."),
        ("Theme", "Family secrets coming out at a funeral is a favorite starting point for dramas."),
    ],
    "Horror": [
        ("Popularity", "Universal's monster movies such as Dracula and Frankenstein made horror popular in the 1930s."),
        ("Example", "The Shining turned an empty hotel into one of the scariest places in film."),
        ("Actor/Actress", "Jamie Lee Curtis became known as a scream queen after Halloween."),
        ("Fun fact", "The shower scene in Psycho used chocolate syrup as blood."),
        ("Platform", "Shudder is a streaming service that shows only horror and thriller films."),
        ("Theme", "Many horror films start when a family moves into a house that is too cheap to be true."),
        ("Popularity", "Found-footage horror became a trend after The Blair Witch Project."),
        ("Example", "Get Out mixes horror with sharp social commentary."),
        ("Actor/Actress", "Vincent Price appeared in dozens of horror films over his career."),
        ("Fun fact", "The Jaws shark broke down so often that the director had to show it less."),
        ("Theme", "Horror often uses a small town where everyone seems to know a secret except the newcomer."),
    ],
    "Romance": [
        ("Popularity", "Casablanca became one of the most loved romantic films of the 1940s."),
        ("Example", "Before Sunrise is a romance built almost entirely on a single long conversation."),
        ("Actor/Actress", "Julia Roberts and Hugh Grant starred together in Notting Hill."),
        ("Fun fact", "Titanic was the first film to pass one billion dollars at the box office."),
        ("Platform", "Many romantic comedies are released on Netflix around Valentine's Day."),
        ("Theme", "Romance films often bring together two people who first cannot stand each other."),
        ("Popularity", "Period romances based on classic novels have a loyal audience."),
        ("Example", "La La Land follows two artists who must choose between love and ambition."),
        ("Actor/Actress", "Ryan Gosling and Rachel McAdams starred together in The Notebook."),
        ("Fun fact", "The famous diner scene in When Harry Met Sally was filmed at a real deli in New York."),
        ("Theme", "A chance meeting on a train or in a cafe starts many romance stories."),
    ],
    "Science Fiction": [
        ("Popularity", "Star Wars made space opera a blockbuster genre in 1977."),
        ("Example", "Blade Runner imagines a rainy future city where machines look human."),
        ("Actor/Actress", "Sigourney Weaver fought the alien in four films as Ellen Ripley."),
        ("Fun fact", "The sound of the lightsaber was made from an old projector motor and television static."),
        ("Platform", "The Star Trek films and series can be streamed on Paramount+."),
        ("Theme", "Science fiction often asks what makes us human when machines start to think."),
        ("Popularity", "Time travel films like Back to the Future remain popular with every new generation."),
        ("Example", "The Matrix suggests that the everyday world might be a simulation."),
        ("Actor/Actress", "Keanu Reeves played Neo in The Matrix trilogy."),
        ("Fun fact", "The Martian was praised by scientists for getting much of its space science right."),
        ("Theme", "Many science fiction stories are about a small crew far from home and running out of time."),
    ],
}

STORIES = [
    ("fantasy-gate", "Fantasy", "Two sisters playing in their garden find a strange gate and step through it into a world that works differently from ours."),
    ("tragedy-loss", "Tragedy", "A mother whose young son has gone missing files a report with the police and waits at a cafe, where her sister joins her."),
    ("romance-secret", "Romance", "Friends gather at a cafe; one confesses she has fallen for the boyfriend of an absent friend, and he feels the same. They argue about how to tell her."),
    ("scifi-oxygen", "Sci-fi", "Breathable air has become a taxed commodity. Two people at a cafe debate ways to get oxygen without paying the price."),
    ("crime-mansion", "Crime", "A rich businessman's wife is found dead in their mansion. A suspect meets the journalist covering the case at a cafe and says she knows the killer."),
    ("comedy-husbands", "Comedy", "Three women at a cafe compare notes on their husbands: one too reckless, one too clingy, and one who has no husband at all."),
]
SEGMENTS = {"fantasy-gate": 6, "tragedy-loss": 5, "romance-secret": 6,
            "scifi-oxygen": 5, "crime-mansion": 7, "comedy-husbands": 5}

SLUG = {"Adventure": "adv", "Animation": "ani", "Comedy": "com", "Crime": "cri",
        "Drama": "dra", "Horror": "hor", "Romance": "rom", "Science Fiction": "sci"}


def main():
    items = []
    v = 0
    for genre, rows in S.items():
        for i, (typ, text) in enumerate(rows, 1):
            item_id = f"{SLUG[genre]}-{i:02d}"
            items.append({"id": item_id, "genre": genre, "type": typ, "text": text,
                          "audio_ref": f"audio/facts/{item_id}.wav",
                          "voice": VOICES[v % len(VOICES)]})
            v += 1
    assert len(items) == 90, len(items)
    stories = []
    for sid, genre, plot in STORIES:
        stories.append({"id": sid, "genre": genre, "plot": plot,
                        "segments": [f"audio/stories/{sid}/{k:02d}.wav"
                                     for k in range(1, SEGMENTS[sid] + 1)]})
    (HERE / "corpus.json").write_text(json.dumps(items, indent=2, ensure_ascii=False) + "\n")
    (HERE / "stories.json").write_text(json.dumps(stories, indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
