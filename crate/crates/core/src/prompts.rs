//! Pinned prompt templates for every model-facing stage.
//!
//! The templates are byte-frozen: golden-file tests assert their rendered
//! form, so any edit here is a deliberate, visible change to model behavior.
//! Placeholders use the `<NAME>` convention and are substituted with
//! [`fill`]. Clip video is attached as request media and precedes the prompt
//! text, so the caption templates start right after the video slot.

/// Clip captioning, character identification variant. The clip transcript
/// excerpt replaces `<CLIP TRANSCRIPTS>`, one `SPEAKER: text` line per
/// utterance.
pub const CAPTION_WITH_CHARACTERS_TEMPLATE: &str = "\
Here are the transcripts for the corresponding video:

<CLIP TRANSCRIPTS>

Describe what is happening in the video in all the details.

Explicitly state the names of the characters in your description when possible.";

/// Clip captioning without character identification (also the fallback when
/// a clip has no surrounding dialogue to quote).
pub const CAPTION_PLAIN_TEMPLATE: &str =
    "Describe what is happening in the video in all the details.";

/// Second captioning turn: appended to the first-turn description to obtain
/// the condensed caption.
pub const CONDENSE_INSTRUCTION: &str =
    "Summarize the above description into a few sentences.";

/// Episode summarization from a screenplay document (captions interleaved
/// with dialogue).
pub const SUMMARY_SCREENPLAY_TEMPLATE: &str = "\
Summarize every single existing subplot from the above dialogue. For each subplot, include throughout your summary any important visual detail or information about character actions, interactions, scene location that you may find in the Video Captions.";

/// Episode summarization from a vision-captioner document with no named
/// caption lines; the visual-detail clause carries no modality qualifier.
pub const SUMMARY_VLOG_TEMPLATE: &str = "\
Summarize every single existing subplot from the above dialogue. For each subplot, include throughout your summary any important visual detail or information about character actions, interactions, scene location.";

/// End-to-end video+transcript summarization by a vision-language model.
pub const SUMMARY_VLM_VIDEO_TEMPLATE: &str = "\
Summarize every single existing subplot from the above dialogue. For each subplot, include throughout your summary any important visual detail or information about character actions, interactions, scene location that you may pick up from the video frames and provided images.";

/// Plain summarization with no visual-detail steering.
pub const SUMMARY_SIMPLE_TEMPLATE: &str = "\
Summarize every single existing subplot from the above dialogue. Your summary should be very complete.";

/// Few-shot decomposition of one reference-summary sentence into atomic
/// facts. The sentence replaces `<INPUT FACT>`; the judge answers with one
/// `- fact` bullet per fact.
pub const FACT_IDENTIFICATION_TEMPLATE: &str = "\
Please break down the following sentence into independent facts:

Katie went to Al's diner and reacted to a `Closed' sign on the door.

- Katie went to Al's diner.

- Katie reacted to a `Closed' sign on the door.

Please break down the following sentence into independent facts:

Simon ushered Lily in, and she spied a romantic candlelit table just for two.

- Simon ushered Lily in

- Lily spied a romantic candlelit table just for two.

Please break down the following sentence into independent facts:

Luke shouted at his lover that the awards were all for him, but Noah shoved the award into Luke's hands and went inside.

- Luke shouted at his lover that the awards were all for him.

- Noah shoved the award into Luke's hands and went inside.

Please break down the following sentence into independent facts:

Bridget suggests that perhaps Eric can help them

- Bridget suggests that perhaps Eric can help them

Please break down the following sentence into independent facts:

At work at the diner, Simon called Metro to make a dinner reservation, as a customer requests him for service and gives him a hard time making fun of him.

- Simon is at work at the diner.

- Simon called Metro to make a dinner reservation.

- A customer requests Simon for service.

- A customer gives Simon a hard time.

- A customer makes fun of Simon.

Please break down the following sentence into independent facts:

Noah and Jack became furious and accused Luke of taking over their work in order to control them.

- Noah and Jack became furious at Luke.

- Noah and Jack accused Luke of taking over their work in order to control them.

Please break down the following sentence into independent facts:

At Marone, Taylor pays Nick a visit.

- Taylor and Nick are at Marone.

- Taylor pays Nick a visit.

Please break down the following sentence into independent facts:

<INPUT FACT>";

/// First visual-fact classification step: is the fact contained in an
/// explanation of the transcripts alone? `<TRANSCRIPTS>` receives the full
/// episode transcript, `<INPUT FACT>` the fact text.
pub const FACT_TRANSCRIPT_SUPPORT_TEMPLATE: &str = "\
<TRANSCRIPTS>

Here is a Fact: <INPUT FACT>.

Suppose you are given only the above Transcripts.
You do not have access to the Fact.
You want to explain to someone everything that happened in the full transcripts above.
Do you think that your explanation will contain the given Fact?

Answer by True or False.
Justify your answer.";

/// Second visual-fact classification step: few-shot screen-vs-conversation
/// labeling. `False` marks facts that cannot be deduced from the
/// conversation (the visual-leaning answer).
pub const FACT_CONVERSATION_FEWSHOT_TEMPLATE: &str = "\
You are given a list of Facts extracted from a movie.

In what follows, your mission is to tell whether the fact is related to what is seen on the screen or to the conversation between the different characters of the story.

Can the fact be deduced from the conversation between the characters?

Fact: There was a `Closed' sign on the door.

Answer: False

Fact: Simon ushered Lily in.

Answer: False

Fact: Luke shouted at his lover that the awards were all for him.

Answer: True

Fact: Noah shoved the award into Luke's hands and went inside.

Answer: False

Fact: Molly felt that something was not quite right about the situation.

Answer: True

Fact: Simon is at work at Al's diner.

Answer: True

Fact: The client's name is Laura and she is frustrated with the service.

Answer: True

Fact: Holden notices a look in Molly's eyes that indicates that Molly does not believe Meg.

Answer: True

Fact: The TV show is aimed at mothers with children.

Answer: True

Fact: Simon is having a hard time dealing with the customer.

Answer: True

Fact: There was a noticeable change in Meg's condition.

Answer: True

Fact: Tim was making fun of John.

Answer: True

Fact: Paul requests the teacher for service.

Answer: True

Fact: Lucinda asked a couple of direct questions about Lily being pregnant.

Answer: True

Fact: Noah accused Luke of taking over his work in order to control him.

Answer: True

Fact: <INPUT FACT>

Answer:";

/// Fact support check against a candidate summary. The candidate summary
/// replaces `<TRANSCRIPTS>` (it is the judged context), the fact replaces
/// `<INPUT FACT>`.
pub const FACT_SUPPORT_TEMPLATE: &str = "\
<TRANSCRIPTS>

Is the Input supported by the above summary?

Input: <INPUT FACT>.

Answer by True or False. Justify your answer.";

/// Substitute `<NAME>` placeholders in a template.
pub fn fill(template: &str, substitutions: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (placeholder, value) in substitutions {
        out = out.replace(placeholder, value);
    }
    out
}

/// The golden catalog: every pinned template rendered with fixed sample
/// inputs, named by what the prompt does. Golden-file tests compare these
/// renderings byte-for-byte against checked-in files.
pub fn pinned_renderings() -> Vec<(&'static str, String)> {
    const SAMPLE_TRANSCRIPTS: &str =
        "MARA: Where were you last night?\nELLIS: I was at the marina.";
    const SAMPLE_FACT: &str = "Ellis was at the marina";
    const SAMPLE_SENTENCE: &str = "Mara poured the wine, and Ellis watched her from the door.";
    const SAMPLE_SUMMARY: &str = "Ellis spent the night at the marina while Mara waited.";
    const SAMPLE_DOCUMENT: &str = "MARA: Where were you last night?\nCaption: Ellis stands alone on the dock.\nELLIS: I was at the marina.";

    vec![
        (
            "caption_with_characters",
            fill(
                CAPTION_WITH_CHARACTERS_TEMPLATE,
                &[("<CLIP TRANSCRIPTS>", SAMPLE_TRANSCRIPTS)],
            ),
        ),
        ("caption_plain", CAPTION_PLAIN_TEMPLATE.to_string()),
        ("condense_instruction", CONDENSE_INSTRUCTION.to_string()),
        (
            "summary_screenplay",
            format!("{SAMPLE_DOCUMENT}\n\n{SUMMARY_SCREENPLAY_TEMPLATE}"),
        ),
        ("summary_vlog", format!("{SAMPLE_DOCUMENT}\n\n{SUMMARY_VLOG_TEMPLATE}")),
        (
            "summary_vlm_video",
            format!("{SAMPLE_DOCUMENT}\n\n{SUMMARY_VLM_VIDEO_TEMPLATE}"),
        ),
        ("summary_simple", format!("{SAMPLE_DOCUMENT}\n\n{SUMMARY_SIMPLE_TEMPLATE}")),
        (
            "fact_identification",
            fill(FACT_IDENTIFICATION_TEMPLATE, &[("<INPUT FACT>", SAMPLE_SENTENCE)]),
        ),
        (
            "fact_transcript_support",
            fill(
                FACT_TRANSCRIPT_SUPPORT_TEMPLATE,
                &[("<TRANSCRIPTS>", SAMPLE_TRANSCRIPTS), ("<INPUT FACT>", SAMPLE_FACT)],
            ),
        ),
        (
            "fact_conversation_fewshot",
            fill(FACT_CONVERSATION_FEWSHOT_TEMPLATE, &[("<INPUT FACT>", SAMPLE_FACT)]),
        ),
        (
            "fact_support",
            fill(
                FACT_SUPPORT_TEMPLATE,
                &[("<TRANSCRIPTS>", SAMPLE_SUMMARY), ("<INPUT FACT>", SAMPLE_FACT)],
            ),
        ),
    ]
}
