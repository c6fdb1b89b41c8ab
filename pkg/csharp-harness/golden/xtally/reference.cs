public static class xTallyUtil
{
    public static int xTally(string x) { return x.Length; }
}
