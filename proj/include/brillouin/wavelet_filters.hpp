#pragma once

// Orthogonal wavelet decomposition low-pass filters.
// Generated by scripts/gen_wavelet_filters.py (mpmath spectral
// factorization at 60-digit precision); do not edit by hand.

#include <map>
#include <string>
#include <vector>

namespace brillouin::detail {

inline const std::map<std::string, std::vector<double>>& wavelet_dec_lo_tables() {
    static const std::map<std::string, std::vector<double>> tables = {
        {"db1", {0.70710678118654752440,
        0.70710678118654752440}},
        {"db2", {0.48296291314453414337,
        0.83651630373780790558,
        0.22414386804201338103,
        -0.12940952255126038117}},
        {"db3", {0.33267055295008261600,
        0.80689150931109257649,
        0.45987750211849157010,
        -0.13501102001025458870,
        -0.085441273882026661693,
        0.035226291885709536603}},
        {"db4", {0.23037781330889650086,
        0.71484657055291564709,
        0.63088076792985890788,
        -0.027983769416859854211,
        -0.18703481171909308408,
        0.030841381835560763627,
        0.032883011666885199735,
        -0.010597401785069032105}},
        {"db5", {0.16010239797419291448,
        0.60382926979718967054,
        0.72430852843777292773,
        0.13842814590132073151,
        -0.24229488706638203186,
        -0.032244869584638374648,
        0.077571493840045713523,
        -0.0062414902127982742742,
        -0.012580751999081999469,
        0.0033357252854737712780}},
        {"db6", {0.11154074335010946362,
        0.49462389039845308568,
        0.75113390802109535068,
        0.31525035170919762909,
        -0.22626469396543982008,
        -0.12976686756726193556,
        0.097501605587323049102,
        0.027522865530305728626,
        -0.031582039317486029565,
        0.00055384220116149613925,
        0.0047772575109455106396,
        -0.0010773010853084795649}},
        {"db7", {0.077852054085009179020,
        0.39653931948191730654,
        0.72913209084623511992,
        0.46978228740519312247,
        -0.14390600392856497541,
        -0.22403618499387498264,
        0.071309219266830264751,
        0.080612609151083071913,
        -0.038029936935014413580,
        -0.016574541630666880654,
        0.012550998556099840613,
        0.00042957797292136652113,
        -0.0018016407040474909153,
        0.00035371379997452024845}},
        {"db8", {0.054415842243104009955,
        0.31287159091429997066,
        0.67563073629728980681,
        0.58535468365420671277,
        -0.015829105256349305667,
        -0.28401554296154692652,
        0.00047248457391328277036,
        0.12874742662047845886,
        -0.017369301001807546170,
        -0.044088253930794751507,
        0.013981027917398281649,
        0.0087460940474057767164,
        -0.0048703529934515743104,
        -0.00039174037337694704630,
        0.00067544940645056936637,
        -0.00011747678412476953373}},
        {"db9", {0.038077947363878346589,
        0.24383467461259035373,
        0.60482312369011111190,
        0.65728807805130053808,
        0.13319738582500757619,
        -0.29327378327917490881,
        -0.096840783222976460514,
        0.14854074933810638014,
        0.030725681479333379212,
        -0.067632829061329973676,
        0.00025094711483145195759,
        0.022361662123679097205,
        -0.0047232047577513972779,
        -0.0042815036824634298345,
        0.0018476468830562264766,
        0.00023038576352319596721,
        -0.00025196318894271013697,
        0.000039347320316271599481}},
        {"db10", {0.026670057900555553587,
        0.18817680007769148902,
        0.52720118893172558648,
        0.68845903945360356574,
        0.28117234366057746075,
        -0.24984642432731537942,
        -0.19594627437737704350,
        0.12736934033579326008,
        0.093057364603572351160,
        -0.071394147166397087145,
        -0.029457536821875812858,
        0.033212674059341001740,
        0.0036065535669561696554,
        -0.010733175483330575044,
        0.0013953517470529011658,
        0.0019924052951850561172,
        -0.00068585669495971162656,
        -0.00011646685512928545095,
        0.000093588670320069591334,
        -0.000013264202894521244812}},
        {"sym2", {-0.12940952255126038117,
        0.22414386804201338103,
        0.83651630373780790558,
        0.48296291314453414337}},
        {"sym3", {0.035226291885709536603,
        -0.085441273882026661693,
        -0.13501102001025458870,
        0.45987750211849157010,
        0.80689150931109257649,
        0.33267055295008261600}},
        {"sym4", {-0.075765714789502213228,
        -0.029635527646002491764,
        0.49761866763277498998,
        0.80373875180513208088,
        0.29785779560530605140,
        -0.099219543576633532585,
        -0.012603967262031303754,
        0.032223100604051467872}},
        {"sym5", {0.019538882735249826776,
        -0.021101834024689041001,
        -0.17532808990805622424,
        0.016602105764510848133,
        0.63397896345679206372,
        0.72340769040404079207,
        0.19939753397685559690,
        -0.039134249302313843624,
        0.029519490925706261250,
        0.027333068344998768818}},
        {"sym6", {-0.0078007083250323804142,
        0.0017677118642540077410,
        0.044724901770781384663,
        -0.021060292512370847992,
        -0.072637522786376583464,
        0.33792942172816583271,
        0.78764114102865099607,
        0.49105594192797373304,
        -0.048311742585698054971,
        -0.11799011114852002540,
        0.0034907120842221625153,
        0.015404109327044824299}},
        {"sym7", {0.012015419283549189053,
        0.017213376300804502861,
        -0.064908003547188485760,
        -0.064131289807385821039,
        0.36021846090626020101,
        0.78192159329172812499,
        0.48361091568226769662,
        -0.056804476889666969319,
        -0.10101092086842029949,
        0.044742349468352376652,
        0.020464207577546033667,
        -0.018126605131338460955,
        -0.0032832978474668107035,
        0.0022918339540537712112}},
        {"sym8", {-0.0033824159510050025955,
        -0.00054213233180001068935,
        0.031695087811525991431,
        0.0076074873249766081919,
        -0.14329423835127266284,
        -0.061273359067811077843,
        0.48135965125905339159,
        0.77718575169962802862,
        0.36444189483617893676,
        -0.051945838107881800736,
        -0.027219029917103486322,
        0.049137179673730286787,
        0.0038087520138944894631,
        -0.014952258337062199118,
        -0.00030292051472413308126,
        0.0018899503327676891843}}
    };
    return tables;
}

}  // namespace brillouin::detail
