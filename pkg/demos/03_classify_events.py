# %% [markdown]
# Classifying simulated events with DTW + kNN
#
# A small three-class corpus (quiescent / impulse / sustained); each series
# is the Dy slope tracker magnitude.  Leave-one-out prediction and the
# row-normalised confusion matrix.

# %%
from csitrack import classify
from csitrack.corpus import CorpusConfig, event_corpus

items = event_corpus(CorpusConfig(per_class=10, seed=5))
print(len(items), "series of", len(items[0].series), "samples")

# %%
preds = classify.leave_one_out(items, classify.DtwConfig(band_radius=0.1, k=3))
truths = [s.label for s in items]
labels, M = classify.confusion_matrix(preds, truths)
print("accuracy", round(classify.accuracy(preds, truths), 3))
print(classify.confusion_csv(labels, M))
