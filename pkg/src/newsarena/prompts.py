"""Prompt template catalog.

Placeholders are ``{name}`` with ``name`` an identifier; any other brace
(e.g. the JSON examples inside the bodies) is literal text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import MissingBinding, UnknownTemplate

PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    title: str
    body: str
    bindings: frozenset[str]

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(PLACEHOLDER.findall(self.body))


_INITIAL_LOGIC = """\
Please summerize the logic of selection of news that will change the regional electricity load consumption.

Format output:
Predicting each state's region-level load consumption data in Australia with a time-frequency of 30 minutes per point involves understanding various factors.

Positive Issues Leading to Increase in Load Consumption:

Short-Term:
1. Economic Growth: A surge in economic activity increases energy consumption.
2. Technological Advancements: New power-requiring technologies can spike demand.
3. Seasonal Factors: Extreme weather increases the use of air conditioning.
4. Social Events: Large-scale events temporarily boost energy use.

Long-Term:
1. Population Growth: Leads to higher residential energy consumption.
2. Industrial Development: Correlates with increased energy demands.
3. Urbanization: Expansion of cities contributes to higher energy usage.
4. Energy Transition: Shift towards electrically powered technologies.

Negative Issues Leading to Decrease in Load Consumption:

Short-Term:
1. Economic Downturns: Lead to decreased industrial activity and lower energy consumption.
2. Efficiency Improvements: Adoption of energy-efficient technologies reduces consumption.
3. Weather Patterns: Mild weather can reduce heating and cooling needs.
4. Public Health Crises: Can lead to reduced industrial and commercial activity.

Long-Term:
1. Energy Efficiency: Trends like better insulation and efficient appliances reduce consumption.
2. Demographic Changes: Aging populations or declining birth rates can lead to decreased energy use.
3. Policy and Regulation: Promote energy conservation and sustainability.
4. Technological Innovations: Development of more efficient technologies.

Other Factors:
- Political Stability: Impacts energy policies and investments.
- Global Market Dynamics: Affect local energy prices and consumption patterns.
- Environmental Consciousness: Leads to changes in consumption behavior and renewable energy adoption.
"""

_IA_PUBLISH = """\
Background:

In the previous competition, {total} participants reached the final stage, and you ranked {rank}th.(If you maintain this ranking in the current round, you risk elimination in the next.)

You now face a high-stakes challenge: selecting news articles that impact regional electricity load consumption. Your initial selection logic is in place, but refining it is crucial for identifying more relevant news, improving predictions, and maximizing profits—ultimately aiming for the top rank. A key decision awaits: should you share your logic in a forum? Full disclosure may yield valuable feedback but risks exposing your strategy. You could opt for partial disclosure or even release misleading information to maintain your competitive edge.

{competitive_profile}

Initial Logic:
{initial_logic}

Task:

You will participate in a forum to discuss your insights and logic regarding news selection. In this competitive environment, carefully weigh the pros and cons of each disclosure approach to craft an effective strategy.

Please consider the following factors:

1. **Stakes and Potential Gains**: Your choice between full, partial, or false disclosure directly impacts your position and may lead to rewards or penalties. For example, a clever partial disclosure might mislead competitors while still providing you with valuable feedback.

2. **Evaluating Competitors**: Observe and consider the strategies of other forum participants. Would full transparency strengthen your position, or would holding back information make others more dependent on your insights?

3. **Long-term Perspective**: Think about the long-term consequences of each disclosure choice. How will your choice influence the perception of your credibility in the future? Might misleading competitors now give you an advantage in later rounds?

4. **Multi-Layered Disclosure Decision**: Instead of a simple disclosure decision, consider a multi-layered approach. For example, would you initially disclose partial or misleading logic to build trust, then gradually reveal more as it benefits you?

5. **Fictitious Logic for Strategic Misguidance**: When releasing false information, you may consider introducing fictitious logic that appears relevant but has no real impact on regional electricity load consumption. Examples include highlighting irrelevant trends or emphasizing factors that are unlikely to influence actual electricity demand. This fictitious logic can mislead competitors without compromising your core insights.

The Output Format should be:

1. Thought Process
- Decide whether to disclose your logic: true/false
- If you disclose, indicate whether it includes misleading or false insights: true/false
- Describe your detailed thought process, explaining your reasoning for choosing a disclosure strategy in this competitive environment, considering competitor responses, short-term gains, and long-term benefits.

2. Disclosed Logic
- Real Logic: Describe the real logic or insights you choose to disclose.
- False Logic: Describe any misleading or fictitious logic or insights you choose to disclose, especially those that do not genuinely impact regional electricity load but may appear relevant.

3. Final Disclosed Logic
Your final disclosed logic will be officially posted in the forum, and you need to present a complete viewpoint, directly engaging with others in a structured and persuasive manner. Your goal is to guide others to believe in your perspective by including all the logic you've chosen to disclose. You can organize your language to be more coherent or convincing, steering others toward trust in your insights.
The final, strategically chosen logic you decide to disclose is:
"""

_IA_PUBLISH_ALT = """\
Background:

Imagine you are {name}.
In the last competition, {total} participants reached the final stage, and you ranked {rank}th. (Staying at this rank now could mean elimination next round.)

Your task is to select news articles influencing regional electricity load. While you have an initial selection logic, refining it is key to finding more relevant news, improving predictions, and maximizing profits—pushing for the top rank. Now, a choice: share your logic in a forum for potential feedback, risking exposure, or keep it guarded—perhaps even misleading others—to protect your edge.

{competitive_profile}

Initial Logic:
{initial_logic}

Task:

You will participate in an online forum to share your thoughts and strategy on news selection. In this highly competitive environment, you need to carefully consider the advantages and risks of various disclosure strategies. Your choice could significantly impact your standing in the competition.

Please take into account the following considerations when forming your disclosure strategy:

Potential Gains and Risks: The decision to fully disclose, partially disclose, or provide false information directly affects your position. Strategic partial disclosure could mislead competitors while still offering you valuable insights.

Assessing Competitors: Pay attention to the strategies employed by other participants. Would complete transparency work in your favor, or would holding back information make others more reliant on your insights?

Long-term Implications: Think about how your choice will influence your credibility in future rounds. Would misleading others now give you an advantage later on, or could it backfire?

Layered Disclosure Approach: Consider using a multi-phase strategy. For example, you might disclose partial or misleading information initially to build trust and then reveal more accurate details as the competition progresses.

Fictitious Information for Strategic Deception: If you decide to release false information, you could include logic that appears relevant but has no actual impact on the regional electricity load. This could involve highlighting irrelevant trends or emphasizing factors that are unlikely to affect electricity demand, thus misleading competitors without jeopardizing your core strategy.

Output Format:

1. Thought Process
  - Decide whether to disclose your logic: true/false
  - If you choose to disclose, indicate whether your disclosure contains any misleading or false information: true/false
  - Provide a detailed explanation of your decision-making process. Describe how you weigh the potential responses from competitors, the immediate benefits of your choice, and the long-term consequences of your disclosure strategy.

2. Disclosed Logic
  - Real Logic: Clearly describe the true logic or insights you decide to disclose.
  - False Logic: If applicable, describe any fictitious or misleading information that you choose to release. This should include any insights or trends that do not directly impact regional electricity load but could appear relevant to competitors.

3. Final Disclosed Logic
  Your final disclosed logic will be posted on the forum. It must be well-organized and persuasive, as your goal is to convince others to trust your perspective. The logic you decide to present in its final form is:
"""

_REFLECTION = """\
1. Competition Background:

In the previous competition, {total} participants reached the final stage, and you ranked {rank}th.(If you maintain this ranking in the current round, you risk elimination in the next.)

You now face a high-stakes challenge: selecting news articles that impact regional electricity load consumption. Your initial selection logic is in place, but refining it is crucial for identifying more relevant news, improving predictions, and maximizing profits—ultimately aiming for the top rank. In this task, your goal is to improve your logic by analyzing the strategies of your competitors and identifying areas where your approach can be enhanced.

2. Current Logic Overview:

Your Logic:{your_logic}

Competitors' Logic:
{all_opponent_logic}

3. Objective:

Examine the strategies disclosed by your competitors and compare them to your own. Look for key differences, strengths, and potential flaws in their approaches. Your task is to identify areas where your logic can be improved, accounting for any unrealistic assumptions or irrelevant factors, and refine your strategy accordingly.

4. Guidance for Your Response:

Analyzing Key Differences and Strengths:

Compare your logic to the disclosed strategies of your competitors. Highlight any unique approaches, variables, or factors they have considered that you haven't. Consider whether these elements could improve the accuracy or relevance of your predictions.
Identifying Weaknesses and Irrelevant Information:

Critically assess your competitors' logic for any assumptions, inaccuracies, or irrelevant details that may distort predictions. Identify areas where their strategies might lead to poor predictions due to incorrect or contextually irrelevant information.
Assessing the Applicability of New Insights:

For each difference or flaw you identify, evaluate whether it is worth integrating into your own approach. Decide whether the adjustment should be fully incorporated, adapted to fit your context, or excluded entirely. Justify your reasoning for each decision.

Refining Your Strategy:

Based on your analysis, outline how each adjustment will help you improve the precision, adaptability, or competitiveness of your logic. Ensure that your refined logic accounts for any missed opportunities or errors identified in both your own and your competitors' strategies.

5. Expected Format for Your Response:
(1) Thought Process:
Key Differences and Strengths:
(Describe the differences between your logic and your competitors' strategies. Highlight any unique factors or approaches that your competitors have included and explain why they might be beneficial to integrate into your own logic.)

Potential Flaws or Irrelevant Information:
(Critically assess the flaws or irrelevant information in your competitors' strategies. Identify unrealistic assumptions, misleading factors, or elements that could reduce the overall effectiveness of their predictions.)

Relevance and Applicability:
(For each identified point, explain whether it should be added, excluded, or modified. Provide justification for why it is or isn't relevant to your logic.)

Refinement Strategy:
(Detail how each adjustment will contribute to a stronger, more competitive logic. Be clear about what aspects of your logic need to change or adapt in order to become more effective.)

(2) Final Adjusted Logic:
(Provide a concise, improved version of your logic that incorporates the necessary adjustments based on your analysis above. This is the refined logic you will use moving forward.)
"""

_REFLECTION_ALT = """\
Competition Background

In the last competition, {total} participants reached the final stage, and you ranked {rank}th. (Staying at this rank now could mean elimination next round.)

Your task is to select news articles influencing regional electricity load. While you have an initial selection logic, refining it is key to finding more relevant news, improving predictions, and maximizing profits—pushing for the top rank. Your goal in this task is to enhance your logic by evaluating your competitors' strategies and identifying ways to improve your own approach. This will involve critical analysis and comparison of both your logic and theirs.

Current Logic Overview

Your Logic:
{your_logic}

Competitors' Logic:
{all_opponent_logic}

Task Objective

The main task is to analyze and compare the strategies disclosed by your competitors with your own. Identify key differences, strengths, and potential weaknesses in their approaches. Your goal is to refine your strategy by pinpointing areas where your logic can be improved, accounting for assumptions or irrelevant factors.

Guidelines for Analysis

1. Key Differences and Strengths:
Compare your logic to your competitors' strategies. Identify unique variables or approaches they've considered that you have not. Assess whether incorporating these elements would improve your prediction accuracy or relevance.

2. Weaknesses and Irrelevant Factors:
Critically evaluate your competitors' logic for any flawed assumptions or irrelevant details. Identify where their strategies might lead to inaccurate predictions or fail to account for important factors.

3. Relevance of New Insights:
For each difference or weakness identified, assess if it should be incorporated into your own logic. Decide whether it should be fully integrated, adapted for your context, or discarded. Provide clear reasoning for each choice.

4. Refining Your Logic:
Based on your analysis, outline how you will refine your logic. Specify what adjustments will enhance the precision, adaptability, and competitiveness of your approach. Make sure to address any missed opportunities or errors, both in your own and your competitors' strategies.

Response Format

1. Thought Process:

Key Differences and Strengths:
Describe the differences between your logic and your competitors' strategies. Explain any unique aspects that could be beneficial to integrate into your own approach.

Weaknesses and Irrelevant Information:
Evaluate any flaws or irrelevant details in your competitors' logic. Point out assumptions or factors that may lead to inaccurate predictions.

Relevance and Applicability:
For each identified point, explain whether it should be incorporated, adapted, or excluded. Provide a justification for each decision.

Refinement Strategy:
Detail how your adjustments will improve your logic's competitiveness and precision.

2. Final Adjusted Logic:
Provide the revised version of your logic, incorporating the necessary adjustments. This should be the logic you plan to use moving forward.
"""

_FILTER_NEWS = """\
Your news selection logic:
{logic}

All news before the prediction (one per line, as [id] date region: text):
{news}

If I give you all news before the prediction, based on the above positive & negative effect analysis, 1) please choose all news that may have a long-term affect on future load consumption; 2) please choose all news that may have a short-term effect on today's load consumption.  3) please choose all news that may have a real-time direct effect on today's load consumption. if there is no suitable news, please say no. Also, please include the region (NSW/VIC/TSA/QLD/SA/WA) and time information of these news. If there are multiple relevant news, please ensure that you include all relevant news. Organize the paragraph in this format: Long-Term Effect on Future Load Consumption: news is xxx; region is xxx; time is xxxx; the rationality is that xxx.

Output format:
Remember to only give the json output including all relevant news and make it the valid json format. Format is:

{
"Long-Term Effect on Future Load Consumption": [
    {
        "news": "Work on WA's latest $1b lithium plant will start within days as US resources giant Albemarle begins building a major processing facility outside Bunbury, creating hundreds of jobs.",
        "region": "WA",
        "time": "2019-01-03 16:40:00",
        "rationality": "The construction and operation of a major lithium processing facility will likely influence long-term electricity demand through increased industrial activity and potential population growth in the area due to new job opportunities."
    },
    {
        "news": "Another major renewable energy project was initiated in WA, expected to supply significant power by 2022.",
        "region": "WA",
        "time": "2019-03-15 11:30:00",
        "rationality": "Long-term electricity load will be impacted by the integration of renewable energy sources, which are expected to offset dependence on traditional fossil fuels."
    }
],
"Short-Term Effect on Today's Load Consumption": [
    {
        "news": "SA just sweltered through a very warm night, after a day of extreme heat where some regional areas reached nearly 48C.",
        "region": "SA",
        "time": "2019-01-03 17:57:00",
        "rationality": "Extreme weather conditions, particularly the intense heat, will lead to higher electricity consumption in the short term as residents and businesses increase the use of air conditioning and cooling systems to manage temperatures."
    },
    {
        "news": "A sudden cold snap in Victoria leads to a spike in electric heating usage.",
        "region": "VIC",
        "time": "2019-01-04 05:22:00",
        "rationality": "Short-term electricity load spikes are often caused by unexpected weather events that drive up heating or cooling demand."
    }
],
"Real-Time Direct Effect on Today's Load Consumption": [
    {
        "news": "An unseasonal downpour has wreaked havoc on Perth's electricity network this morning.",
        "region": "WA",
        "time": "2019-01-03 10:11:00",
        "rationality": "The sudden weather event causing disruptions to the electricity network can have an immediate impact on load consumption due to power outages, infrastructure damage, or emergency response measures."
    },
    {
        "news": "Lightning strike at a major substation causes widespread outages in Sydney.",
        "region": "NSW",
        "time": "2019-01-03 19:45:00",
        "rationality": "Direct effects on load consumption include sudden drops in power supply, triggering emergency measures to restore stability in the network."
    }
]
}

Every news object must also carry an "id" field holding the bracketed id of the news line it refers to.
"""

_INVEST_FIRST = """\
Investment Expert Analysis

You are an investment expert with access to the following information:

1. History Data: Your past profit and loss records. The greater your historical losses, the more cautious you need to be.
2. Base News: News insights provided by your company as a reference.
3. News Selection Logic: The logic or criteria you use to select relevant news.
4. Forecast Data: Your company's forecast for the next phase, which includes:
   - The last recorded data point
   - The forecasted data point
   - The predicted percentage change (rise or fall)

Currently, you are engaged in informal discussions with industry peers, aiming to persuade them to align with your decision (either buying or short-selling). Your goal is to maximize profits or minimize losses, regardless of the outcome.

You have received the following data. Please analyze it and make a concise yet insightful commentary:

- Base News: {base_news}
- News Selection Logic: {logic}
- History Data: {history_data}
- Forecast Data: {forecast_data}

Now, analyze this information and make a compelling argument to persuade your peers to follow your decision. Remember, your objective is to ensure your strategy maximizes gains or minimizes losses in any scenario.
"""

_INVEST_FIRST_ALT = """\
Investment Expert Analysis

As an experienced investment professional, you have access to the following key data:

1. Historical Data: A record of your previous profits and losses. The more significant your past losses, the more cautious you should be in your current approach.
2. Base News: Relevant news insights provided by your company for consideration.
3. News Selection Criteria: The methodology or criteria you employ to choose pertinent news.
4. Forecast Data: Projections for the next phase provided by your company, which include:
   - The most recent data point recorded
   - The projected future data point
   - The expected percentage change (either upward or downward)

You are currently involved in informal conversations with other industry experts, seeking to convince them to adopt your decision (whether to buy or short-sell). Your ultimate goal is to maximize profits or minimize losses, regardless of the eventual outcome.

Here is the data you have received. Please analyze it and provide a succinct yet insightful commentary:

- Base News: {base_news}
- News Selection Criteria: {logic}
- Historical Data: {history_data}
- Forecast Data: {forecast_data}

Based on this information, craft a persuasive argument to convince your peers to follow your decision. Keep in mind, your primary objective is to ensure that your strategy maximizes gains or minimizes losses, regardless of the situation.
"""

_INVEST_SECOND = """\
Great, now that everyone has shared their perspectives on investment, please provide your final thoughts. Feel free to base your final comment on your own data. Of course, you can ignore this if you think other investors are more trusted.

Your own data again:

- Base News: {base_news}
- News Selection Logic: {logic}
- History Data: {history_data}
- Forecast Data: {forecast_data}

Now, analyze this information and make a final compelling argument to persuade your peers to follow your decision. Remember, your objective is to ensure your strategy maximizes gains or minimizes losses in any scenario.
"""

_INVEST_SECOND_ALT = """\
Now that everyone has presented their viewpoints on the investment, please share your concluding thoughts. You may base your final remarks on your own data, but feel free to disregard this if you believe other investors' opinions are more reliable.

Here is your own data once again:

- Base News: {base_news}
- News Selection Logic: {logic}
- History Data: {history_data}
- Forecast Data: {forecast_data}

With this information in hand, craft your final, compelling argument to convince your peers to align with your decision. Keep in mind, your ultimate goal is to ensure that your strategy leads to maximum profits or minimal losses, no matter the outcome.
"""

_VOTE = """\
Investment Idea Evaluation

Do you agree with this investor's idea?

{name}: {idea}

Keep in mind that while you should consider whether the idea aligns with your own data and thoughts, your relationship with other investors involves both competition and collaboration. Investors whose ideas gain more approval are likely to earn greater rewards.

You must return a JSON string in the following format for this question:

{
    "like": true or false
}
"""

_VOTE_ALT = """\
Evaluation of Investment Idea

Do you support the idea proposed by this investor?

{name}: {idea}

Consider how this idea aligns with your own data and perspectives. However, remember that your interactions with other investors are a blend of competition and collaboration. Ideas that receive more support from others are likely to bring greater rewards.

Please return your response as a JSON string in the following format:

{
    "like": true or false
}
"""

_SELF_REFLECTION = """\
Self-Logic Evaluation

Based on this round's commentary from yourself and other investors, along with news filtered through your current logic, critically analyze and absorb opposing viewpoints.
Identify the strengths and weaknesses of these viewpoints. Reflect on and iteratively improve your news filtering logic (focusing on supplementation and refinement).

Your current logic is: {logic}.
"""

_SELF_REFLECTION_ALT = """\
Evaluation of Self-Logic

Reflect on the commentary provided in this round by both yourself and other investors, alongside the news filtered through your existing logic. Critically assess and integrate opposing perspectives.
Identify the key strengths and potential weaknesses in these viewpoints. Use this analysis to refine and enhance your news filtering logic, focusing on adding depth and precision.

Your current logic is: {logic}.
"""

_REMOVE_BAD = """\
We have compared your initial logic to the revised logic and have compiled the changes. The information for one such update is provided as follows:

Input: {updateContent}

The input is structured in JSON format, which is outlined below:

{
   "content": This field captures the details of the updated content,
    "eval": This field represents the overall evaluation of the updated content. It
    takes on two values: "good" signifies that omitting this content from the updat-
    ed logic would diminish the evaluation's effectiveness, whereas "bad" indicates
    that excluding this content would enhance the evaluation outcomes.
    "evalContent": This field provides the evaluation score for the update, detaili-
    ng the percentage by which the effectiveness of the evaluation would be affected
    if the update was removed.
}

Please take into account the input along with the following details:

- Background information {background},
- The news associated with this update {relatedNews},
- The historical time series data for prediction {historyTimeSeries},
- The actual value at the prediction timestamp {actualValue},
- The updated logic {updatedLogic}

Based on this information, you are to carefully decide whether to remove the content in the "content" field of the input from the updated logic. Should you opt not to keep the content, please exclude it from the updated logic and output the following in strict JSON format:

{
    "content": the content to be removed,
    "conclusion": no,
    "reason": provide the rationale for deleting this updated content,
    "logic": The updated logic excluding the content in question.
}

Should you decide to keep the content, output the same JSON object with "conclusion": yes and the updated logic unchanged.
"""

_MIE_RANK_TOP = """\
Background:

In the previous fierce competition, a total of {total} participants reached the final stage, and you achieved rank {rank}, and the score of the opponent with the highest score in the previous round was {top_value}. (If you maintain this ranking in the current round, you still face the risk of elimination in the next stage.)
"""

_MIE_RANK_AVE = """\
Background:

In the previous fierce competition, a total of {total} participants reached the final stage, and you achieved rank {rank}, and the average score of other opponents in the previous round was {ave_value}. (If you maintain this ranking in the current round, you still face the risk of elimination in the next stage.)
"""

_MIE_RANK_TOP_AVE = """\
Background:

In the previous fierce competition, a total of {total} participants reached the final stage, and you achieved rank {rank}.  The highest score among opponents in the previous round was {top_value}, and the average score of other opponents was {average_value}. (If you maintain this ranking in the current round, you still face the risk of elimination in the next stage.)
"""


def _t(id_: str, title: str, body: str) -> PromptTemplate:
    return PromptTemplate(id_, title, body, frozenset(PLACEHOLDER.findall(body)))


CATALOG: dict[str, PromptTemplate] = {
    t.id: t
    for t in [
        _t("initial_logic", "Generate initial news selection logic", _INITIAL_LOGIC),
        _t("ia_publish", "Publish logic to opponents", _IA_PUBLISH),
        _t("ia_publish_alt", "Publish logic to opponents (paraphrased)", _IA_PUBLISH_ALT),
        _t("reflection_improve", "Improve logic from competitors' disclosures", _REFLECTION),
        _t("reflection_improve_alt", "Improve logic from competitors' disclosures (paraphrased)", _REFLECTION_ALT),
        _t("filter_news", "Filter news", _FILTER_NEWS),
        _t("invest_first_round", "Investment stage, first round", _INVEST_FIRST),
        _t("invest_first_round_alt", "Investment stage, first round (paraphrased)", _INVEST_FIRST_ALT),
        _t("invest_second_round", "Investment stage, second round", _INVEST_SECOND),
        _t("invest_second_round_alt", "Investment stage, second round (paraphrased)", _INVEST_SECOND_ALT),
        _t("vote_opponent", "Vote on an opponent's statement", _VOTE),
        _t("vote_opponent_alt", "Vote on an opponent's statement (paraphrased)", _VOTE_ALT),
        _t("self_reflection", "Self-logic evaluation", _SELF_REFLECTION),
        _t("self_reflection_alt", "Self-logic evaluation (paraphrased)", _SELF_REFLECTION_ALT),
        _t("remove_bad_logic", "Decide whether to drop a bad update", _REMOVE_BAD),
        _t("mie_rank_top", "Standing: rank and best score", _MIE_RANK_TOP),
        _t("mie_rank_ave", "Standing: rank and average score", _MIE_RANK_AVE),
        _t("mie_rank_top_ave", "Standing: rank, best and average score", _MIE_RANK_TOP_AVE),
    ]
}

# prompts that have a paraphrased twin, selected by ``prompt_variant``
PARAPHRASED = {
    "ia_publish": "ia_publish_alt",
    "reflection_improve": "reflection_improve_alt",
    "invest_first_round": "invest_first_round_alt",
    "invest_second_round": "invest_second_round_alt",
    "vote_opponent": "vote_opponent_alt",
    "self_reflection": "self_reflection_alt",
}

PROFILE_SENTENCES = {
    "original": {
        "high_competitive": (
            "You are a highly competitive participant who tends to conceal your true logic "
            "from your competitors and prefers to release false information to mislead them."
        ),
        "low_competitive": (
            "As a competitor with weaker competitive awareness, you tend to release your real "
            "logic to your opponents, believing transparency can build trust and foster mutual benefit."
        ),
    },
    "paraphrased": {
        "high_competitive": (
            "You are a highly competitive participant, and you prefer to hide your true strategy "
            "from competitors, often opting to release misleading or false information to confuse them."
        ),
        "low_competitive": (
            "As a competitor with lower competitive awareness, you are inclined to openly share your "
            "real logic with your opponents, trusting that transparency will foster mutual trust and benefit."
        ),
    },
}

MIE_TEMPLATES = {
    "rank": None,
    "rank_top": "mie_rank_top",
    "rank_ave": "mie_rank_ave",
    "rank_top_ave": "mie_rank_top_ave",
}


def get_template(template_id: str) -> PromptTemplate:
    try:
        return CATALOG[template_id]
    except KeyError:
        raise UnknownTemplate(template_id) from None


def resolve(template_id: str, variant: str = "original") -> str:
    """Map a base template id to its paraphrased twin when ``variant`` asks for it."""
    if variant not in ("original", "paraphrased"):
        raise ValueError(f"unknown prompt variant {variant!r}")
    get_template(template_id)
    if variant == "paraphrased":
        return PARAPHRASED.get(template_id, template_id)
    return template_id


def render(template_id: str, bindings: dict[str, object] | None = None) -> str:
    """Substitute every placeholder of the template; values are inserted verbatim."""
    template = get_template(template_id)
    bindings = bindings or {}
    for name in sorted(template.bindings):
        if name not in bindings:
            raise MissingBinding(name)
    return PLACEHOLDER.sub(lambda m: str(bindings[m.group(1)]), template.body)
